#include "supertheta/thetanull.hpp"

#include <stdexcept>

namespace st {

namespace {

int64_t md(int64_t a, int64_t N) {
    a %= N;
    return a < 0 ? a + N : a;
}

int64_t dot(const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
    int64_t s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<int64_t> bits(uint32_t a, size_t g) {
    std::vector<int64_t> v(g);
    for (size_t i = 0; i < g; ++i) v[i] = (a >> i) & 1;
    return v;
}

}  // namespace

size_t zn_size(size_t g, int64_t N) {
    size_t n = 1;
    for (size_t i = 0; i < g; ++i) n *= static_cast<size_t>(N);
    return n;
}

size_t zn_index(const std::vector<int64_t>& x, int64_t N) {
    size_t idx = 0;
    for (size_t i = x.size(); i-- > 0;) idx = idx * static_cast<size_t>(N) + static_cast<size_t>(md(x[i], N));
    return idx;
}

std::vector<int64_t> zn_vector(size_t idx, size_t g, int64_t N) {
    std::vector<int64_t> v(g);
    for (size_t i = 0; i < g; ++i) {
        v[i] = static_cast<int64_t>(idx % static_cast<size_t>(N));
        idx /= static_cast<size_t>(N);
    }
    return v;
}

// ---------------------------------------------------------------------------

HeisenbergGroup::HeisenbergGroup(const Field* F_, size_t g_, int64_t N_, Fq zeta_) : F(F_), g(g_), N(N_), zeta(zeta_) {
    if (N < 1) throw std::invalid_argument("HeisenbergGroup: level must be positive");
    if (zeta.pow(N) != F->unit()) throw std::invalid_argument("HeisenbergGroup: zeta is not an N-th root of unity");
    for (int64_t d = 1; d < N; ++d)
        if (N % d == 0 && zeta.pow(d) == F->unit())
            throw std::invalid_argument("HeisenbergGroup: zeta is not primitive");
}

HeisenbergGroup::Elem HeisenbergGroup::identity() const { return {F->unit(), std::vector<int64_t>(g, 0), std::vector<int64_t>(g, 0)}; }

HeisenbergGroup::Elem HeisenbergGroup::make(Fq s, std::vector<int64_t> x, std::vector<int64_t> chi) const {
    if (x.size() != g || chi.size() != g) throw std::invalid_argument("HeisenbergGroup: delta mismatch");
    if (s.is_zero()) throw std::invalid_argument("HeisenbergGroup: scalar must be a unit");
    for (auto& c : x) c = md(c, N);
    for (auto& c : chi) c = md(c, N);
    return {s, std::move(x), std::move(chi)};
}

Fq HeisenbergGroup::character(const std::vector<int64_t>& chi, const std::vector<int64_t>& y) const {
    return zeta.pow(md(dot(chi, y), N));
}

HeisenbergGroup::Elem HeisenbergGroup::mul(const Elem& a, const Elem& b) const {
    if (a.x.size() != g || b.x.size() != g) throw std::invalid_argument("HeisenbergGroup::mul: delta mismatch");
    Elem r;
    r.s = a.s * b.s * character(b.chi, a.x);
    r.x.resize(g);
    r.chi.resize(g);
    for (size_t i = 0; i < g; ++i) {
        r.x[i] = md(a.x[i] + b.x[i], N);
        r.chi[i] = md(a.chi[i] + b.chi[i], N);
    }
    return r;
}

HeisenbergGroup::Elem HeisenbergGroup::inv(const Elem& a) const {
    // (s, x, chi)^{-1} = (s^{-1} chi(x), -x, -chi).
    Elem r;
    r.s = a.s.inv() * character(a.chi, a.x);
    r.x.resize(g);
    r.chi.resize(g);
    for (size_t i = 0; i < g; ++i) {
        r.x[i] = md(-a.x[i], N);
        r.chi[i] = md(-a.chi[i], N);
    }
    return r;
}

bool HeisenbergGroup::equal(const Elem& a, const Elem& b) const { return a.s == b.s && a.x == b.x && a.chi == b.chi; }

std::vector<Fq> HeisenbergGroup::act(const Elem& a, const std::vector<Fq>& f) const {
    const size_t n = zn_size(g, N);
    if (f.size() != n) throw std::invalid_argument("HeisenbergGroup::act: vector has the wrong length");
    std::vector<Fq> out(n, F->zero());
    for (size_t idx = 0; idx < n; ++idx) {
        auto y = zn_vector(idx, g, N);
        std::vector<int64_t> xy(g);
        for (size_t i = 0; i < g; ++i) xy[i] = a.x[i] + y[i];
        out[idx] = a.s * character(a.chi, y) * f[zn_index(xy, N)];
    }
    return out;
}

Mat HeisenbergGroup::matrix(const Elem& a) const {
    const size_t n = zn_size(g, N);
    Mat M(F, n, n);
    for (size_t j = 0; j < n; ++j) {
        std::vector<Fq> e(n, F->zero());
        e[j] = F->unit();
        auto col = act(a, e);
        for (size_t i = 0; i < n; ++i) M(i, j) = col[i].r;
    }
    return M;
}

HeisenbergGroup::Elem HeisenbergGroup::d_minus1(const Elem& a) const {
    Elem r = a;
    for (size_t i = 0; i < g; ++i) {
        r.x[i] = md(-a.x[i], N);
        r.chi[i] = md(-a.chi[i], N);
    }
    return r;
}

static void check_pair(const HeisenbergGroup& small, const HeisenbergGroup& big) {
    if (big.N != 2 * small.N || big.g != small.g) throw std::invalid_argument("structural map: delta mismatch");
    if (big.zeta * big.zeta != small.zeta) throw std::invalid_argument("structural map: incompatible roots of unity");
}

HeisenbergGroup::Elem structural_E2(const HeisenbergGroup& small, const HeisenbergGroup& big,
                                    const HeisenbergGroup::Elem& a) {
    check_pair(small, big);
    // [2] embeds Z_N into Z_2N as x -> 2x; chi o r has vector 2 chi.
    std::vector<int64_t> x(a.x.size()), chi(a.chi.size());
    for (size_t i = 0; i < x.size(); ++i) {
        x[i] = 2 * a.x[i];
        chi[i] = 2 * a.chi[i];
    }
    return big.make(a.s * a.s, x, chi);
}

HeisenbergGroup::Elem structural_H2(const HeisenbergGroup& big, const HeisenbergGroup& small,
                                    const HeisenbergGroup::Elem& a) {
    check_pair(small, big);
    // r reduces mod N; chi o [2] has vector chi mod N.
    return small.make(a.s * a.s, a.x, a.chi);
}

// ---------------------------------------------------------------------------

bool ThetaNullpoint::is_symmetric() const {
    for (size_t idx = 0; idx < q.size(); ++idx) {
        auto x = zn_vector(idx, g, level);
        for (auto& c : x) c = -c;
        if (q[zn_index(x, level)] != q[idx]) return false;
    }
    return true;
}

ThetaConstants ThetaConstants::squared() const {
    ThetaConstants r = *this;
    r.squares = true;
    for (auto& x : r.v) x = x * x;
    return r;
}

ThetaConstants ThetaConstants::normalized() const {
    const uint32_t n = 1u << g;
    for (uint32_t b = 0; b < n; ++b)
        for (uint32_t a = 0; a < n; ++a) {
            if (parity(a, b) || at(a, b).is_zero()) continue;
            ThetaConstants r = *this;
            Fq c = at(a, b).inv();
            for (auto& x : r.v) x = x * c;
            return r;
        }
    throw std::runtime_error("ThetaConstants: every even entry vanishes");
}

bool ThetaConstants::proportional_to(const ThetaConstants& o) const {
    if (g != o.g || v.size() != o.v.size()) return false;
    auto a = normalized(), b = o.normalized();
    return a.v == b.v;
}

ThetaConstants fourier_theta(const ThetaNullpoint& q4, Fq i) {
    if (q4.level != 4) throw std::invalid_argument("fourier_theta: level 4 nullpoint expected");
    const Field* F = i.F;
    if (i * i != F->integer(-1)) throw std::invalid_argument("fourier_theta: i does not square to -1");
    const size_t g = q4.g;
    const uint32_t n = 1u << g;
    ThetaConstants th;
    th.g = g;
    th.v.assign(static_cast<size_t>(n) * n, F->zero());
    for (uint32_t a = 0; a < n; ++a)
        for (uint32_t b = 0; b < n; ++b) {
            auto av = bits(a, g), bv = bits(b, g);
            Fq acc = F->zero();
            for (uint32_t t = 0; t < n; ++t) {
                auto c = bits(t, g);
                for (size_t k = 0; k < g; ++k) c[k] = av[k] + 2 * c[k];
                acc += i.pow(md(dot(c, bv), 4)) * q4.q[zn_index(c, 4)];
            }
            th.v[ThetaConstants::index(a, b, g)] = acc;
        }
    return th;
}

ThetaNullpoint inverse_fourier_theta(const ThetaConstants& th, Fq i) {
    if (th.squares) throw std::invalid_argument("inverse_fourier_theta: needs theta constants, not squares");
    const Field* F = i.F;
    const size_t g = th.g;
    const uint32_t n = 1u << g;
    ThetaNullpoint q;
    q.g = g;
    q.level = 4;
    q.q.assign(zn_size(g, 4), F->zero());
    Fq scale = F->integer(static_cast<int64_t>(n)).inv();
    for (uint32_t a = 0; a < n; ++a)
        for (uint32_t t = 0; t < n; ++t) {
            auto av = bits(a, g), tv = bits(t, g);
            Fq acc = F->zero();
            for (uint32_t b = 0; b < n; ++b) {
                auto bv = bits(b, g);
                int64_t e = md(-dot(av, bv) + 2 * dot(tv, bv), 4);
                acc += i.pow(e) * th.at(a, b);
            }
            std::vector<int64_t> c(g);
            for (size_t k = 0; k < g; ++k) c[k] = av[k] + 2 * tv[k];
            q.q[zn_index(c, 4)] = acc * scale;
        }
    return q;
}

ThetaConstants squares_from_level2(const ThetaNullpoint& q2) {
    if (q2.level != 2) throw std::invalid_argument("squares_from_level2: level 2 nullpoint expected");
    const size_t g = q2.g;
    const uint32_t n = 1u << g;
    if (q2.q.size() != n) throw std::invalid_argument("squares_from_level2: wrong table size");
    const Field* F = q2.q.front().F;
    ThetaConstants th;
    th.g = g;
    th.squares = true;
    th.v.assign(static_cast<size_t>(n) * n, F->zero());
    for (uint32_t a = 0; a < n; ++a)
        for (uint32_t b = 0; b < n; ++b) {
            Fq acc = F->zero();
            for (uint32_t x = 0; x < n; ++x) {
                Fq term = q2.q[x] * q2.q[x ^ a];
                acc += ThetaConstants::parity(x, b) ? -term : term;
            }
            th.v[ThetaConstants::index(a, b, g)] = acc;
        }
    return th;
}

std::vector<Fq> duplication_image(const Field& F, size_t g) {
    const size_t n = zn_size(g, 4);
    std::vector<Fq> v(n, F.zero());
    for (size_t idx = 0; idx < n; ++idx) {
        auto x = zn_vector(idx, g, 4);
        bool even = true;
        for (auto c : x) even = even && c % 2 == 0;
        if (even) v[idx] = F.unit();
    }
    return v;
}

std::vector<HeisenbergGroup::Elem> duplication_level_group(const HeisenbergGroup& G4) {
    if (G4.N != 4) throw std::invalid_argument("duplication_level_group: level 4 group expected");
    std::vector<HeisenbergGroup::Elem> out;
    for (size_t k = 0; k < G4.g; ++k) {
        std::vector<int64_t> e(G4.g, 0), z(G4.g, 0);
        e[k] = 2;
        out.push_back(G4.make(G4.F->unit(), e, z));
        out.push_back(G4.make(G4.F->unit(), z, e));
    }
    return out;
}

VanishingProfile vanishing_profile(const ThetaConstants& th) {
    VanishingProfile p;
    const uint32_t n = 1u << th.g;
    for (uint32_t a = 0; a < n; ++a)
        for (uint32_t b = 0; b < n; ++b) {
            int par = ThetaConstants::parity(a, b);
            p.odd_total += par;
            if (!th.at(a, b).is_zero()) continue;
            (par ? p.odd : p.even).emplace_back(a, b);
        }
    return p;
}

std::array<Fq, 3> rosenhain_g2(const ThetaConstants& squares) {
    if (squares.g != 2) throw std::invalid_argument("rosenhain_g2: genus 2 input expected");
    if (!squares.squares) throw std::invalid_argument("rosenhain_g2: squared theta constants expected");
    for (uint32_t a = 0; a < 4; ++a)
        for (uint32_t b = 0; b < 4; ++b)
            if (!ThetaConstants::parity(a, b) && squares.at(a, b).is_zero())
                throw std::runtime_error("rosenhain_g2: decomposable or non-hyperelliptic input");
    auto t = [&](size_t i) { return squares.v.at(i); };
    std::array<Fq, 3> l{t(0) * t(2) / (t(1) * t(3)), t(2) * t(8) / (t(3) * t(9)), t(0) * t(8) / (t(1) * t(9))};
    const Field* F = l[0].F;
    for (size_t i = 0; i < 3; ++i) {
        if (l[i].is_zero() || l[i] == F->unit()) throw std::logic_error("rosenhain_g2: invariant in {0, 1}");
        for (size_t j = 0; j < i; ++j)
            if (l[i] == l[j]) throw std::logic_error("rosenhain_g2: invariants not distinct");
    }
    return l;
}

}  // namespace st

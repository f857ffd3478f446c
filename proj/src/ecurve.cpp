#include "supertheta/ecurve.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace st {

// ---------------------------------------------------------------------------
// Curve

std::shared_ptr<const Curve> Curve::make(FieldPtr F, Fq a, Fq b) {
    Fq disc = F->integer(4) * a * a * a + F->integer(27) * b * b;
    if (disc.is_zero()) throw std::invalid_argument("Curve: singular Weierstrass equation");
    auto E = std::shared_ptr<Curve>(new Curve());
    E->F_ = std::move(F);
    E->a_ = a;
    E->b_ = b;
    return E;
}

bool Curve::on_curve(const Pt<Fq>& P) const {
    if (P.inf) return true;
    return P.y * P.y == rhs(P.x);
}

const std::vector<Pt<Fq>>& Curve::points() const {
    std::call_once(points_once_, [this] { enumerate_points(); });
    return points_;
}

void Curve::enumerate_points() const {
    const Field& F = *F_;
    std::vector<Pt<Fq>> pts;
    pts.push_back(Pt<Fq>::infinity());
    for (uint32_t idx = 0; idx < F.q(); ++idx) {
        Fq x = F.elem(F.from_index(idx));
        Fq r = rhs(x);
        if (!F.is_square(r.r)) continue;
        Fq y = F.elem(F.sqrt(r.r));
        pts.emplace_back(x, y);
        if (!y.is_zero()) pts.emplace_back(x, -y);
    }
    for (size_t i = 0; i < pts.size(); ++i) index_[key(pts[i])] = i;
    points_ = std::move(pts);
}

size_t Curve::point_index(const Pt<Fq>& P) const {
    points();
    auto it = index_.find(key(P));
    if (it == index_.end()) throw std::invalid_argument("point_index: point not on the curve");
    return it->second;
}

Pt<Fq> Curve::random_point(std::mt19937_64& rng) const {
    const auto& pts = points();
    return pts[1 + rng() % (pts.size() - 1)];
}

std::vector<Pt<Fq>> Curve::torsion(int64_t n) const {
    std::vector<Pt<Fq>> out;
    for (const auto& P : points())
        if (mul(P, n).inf) out.push_back(P);
    return out;
}

int64_t Curve::order(const Pt<Fq>& P) const {
    const int64_t h = static_cast<int64_t>(points().size());
    int64_t best = h;
    for (int64_t d = 1; d * d <= h; ++d) {
        if (h % d) continue;
        if (d < best && mul(P, d).inf) best = d;
        int64_t e = h / d;
        if (e < best && mul(P, e).inf) best = e;
    }
    return best;
}

Pt<Laurent> Curve::to_laurent(const Pt<Fq>& P, size_t len) const {
    if (P.inf) return Pt<Laurent>::infinity();
    return Pt<Laurent>(Laurent::constant(F_.get(), P.x.r, len), Laurent::constant(F_.get(), P.y.r, len));
}

const std::vector<uint32_t>& Curve::formal_w() const {
    std::call_once(w_once_, [this] { expand_formal_w(); });
    return w_;
}

void Curve::expand_formal_w() const {
    const Field& F = *F_;
    const size_t L = Laurent::kMaxLength + 8;
    // w = z^3 + a z w^2 + b w^3, solved coefficient by coefficient: the
    // right-hand side at degree n only involves w_k with k <= n - 4.
    std::vector<uint32_t> w(L, 0), w2(L, 0), w3(L, 0);
    w[3] = 1;
    auto upd = [&](size_t n) {
        uint32_t s2 = 0, s3 = 0;
        for (size_t i = 3; i + 3 <= n; ++i) s2 = F.add(s2, F.mul(w[i], w[n - i]));
        w2[n] = s2;
        for (size_t i = 3; i + 6 <= n; ++i) s3 = F.add(s3, F.mul(w[i], w2[n - i]));
        w3[n] = s3;
    };
    for (size_t n = 0; n < L; ++n) {
        if (n > 3) {
            uint32_t v = 0;
            v = F.add(v, F.mul(a_.r, w2[n - 1]));
            v = F.add(v, F.mul(b_.r, w3[n]));
            w[n] = v;
        }
        upd(n);
    }
    w_ = std::move(w);
}

Pt<Laurent> Curve::formal_point(uint32_t c, size_t len) const {
    const Field* F = F_.get();
    if (c == 0) return Pt<Laurent>::infinity();
    const auto& w = formal_w();
    if (len == 0 || len > Laurent::kMaxLength) throw std::invalid_argument("formal_point: bad series length");
    std::vector<uint32_t> coeffs(w.begin() + 3, w.begin() + 3 + static_cast<std::ptrdiff_t>(len));
    Laurent ws = Laurent::from_coeffs(F, 3, std::move(coeffs));
    Laurent z = Laurent::monomial(F, 1, 1, Laurent::kMaxLength);
    Laurent winv = ws.inv();
    Laurent x = z * winv;
    Laurent y = -winv;
    return Pt<Laurent>(x.rescale_variable(c), y.rescale_variable(c));
}

// ---------------------------------------------------------------------------
// Endomorphisms

EndoRing::EndoRing(CurvePtr E, Order O, RatMap w_map, RatMap frob_map)
    : E_(std::move(E)), O_(std::move(O)), w_(std::move(w_map)), f_(std::move(frob_map)) {}

RatMap EndoRing::frobenius_map(const Curve& E) {
    const Field& F = E.field();
    const uint32_t p = F.p();
    RatMap m;
    m.xn.assign(p + 1, 0);
    m.xn[p] = 1;
    // y^p = y (x^3 + a x + b)^{(p-1)/2}
    std::vector<uint32_t> rhs{E.b().r, E.a().r, 0, 1};
    std::vector<uint32_t> acc{1};
    for (uint32_t k = 0; k < (p - 1) / 2; ++k) {
        std::vector<uint32_t> nxt(acc.size() + 3, 0);
        for (size_t i = 0; i < acc.size(); ++i)
            for (size_t j = 0; j < 4; ++j) nxt[i + j] = F.add(nxt[i + j], F.mul(acc[i], rhs[j]));
        acc = std::move(nxt);
    }
    m.yn = acc;
    return m;
}

void EndoRing::coords(const OElem& a, int64_t* c) const {
    if (!a.integral_coords())
        throw std::domain_error("order element " + O_.to_string(a) +
                                " has non-integral coordinates and cannot be evaluated on points");
    c[0] = a.a0.get_num().get_si();
    c[1] = a.a1.get_num().get_si();
    c[2] = a.b0.get_num().get_si();
    c[3] = a.b1.get_num().get_si();
}

void EndoRing::validate(std::mt19937_64& rng, int samples) const {
    const Curve& E = *E_;
    const CMData& cm = O_.cm();
    for (int s = 0; s < samples; ++s) {
        Pt<Fq> P = E.random_point(rng), Q = E.random_point(rng);
        for (const RatMap* m : {&w_, &f_}) {
            Pt<Fq> mp = m->apply(P);
            if (!E.on_curve(mp)) throw std::invalid_argument("endomorphism does not map the curve to itself");
            if (m->apply(E.add(P, Q)) != E.add(mp, m->apply(Q)))
                throw std::invalid_argument("endomorphism is not additive");
        }
        Pt<Fq> ww = E.add(E.add(w_.apply(w_.apply(P)), E.mul(w_.apply(P), cm.t)), E.mul(P, cm.n));
        if (!ww.inf) throw std::invalid_argument("CM generator violates its minimal polynomial");
        Pt<Fq> ff = E.add(f_.apply(f_.apply(P)), E.mul(P, cm.p));
        if (!ff.inf) throw std::invalid_argument("Frobenius violates F^2 + p = 0");
        Pt<Fq> FP = f_.apply(P);
        Pt<Fq> lhs = f_.apply(w_.apply(P));
        Pt<Fq> rhs = E.sub(E.mul(FP, -cm.t), w_.apply(FP));
        if (lhs != rhs) throw std::invalid_argument("F w != conj(w) F");
    }
}

// ---------------------------------------------------------------------------
// Weil pairing

namespace {

// Value at Q of the line through A and B divided by the vertical at A+B, or
// nullopt when Q hits a zero or pole.
std::optional<Fq> line_over_vertical(const Curve& E, const Pt<Fq>& A, const Pt<Fq>& B, const Pt<Fq>& Q) {
    const Field& F = E.field();
    if (Q.inf) return std::nullopt;
    if (A.inf || B.inf) return F.unit();
    Fq num, den;
    Pt<Fq> C = E.add(A, B);
    if (A.x == B.x && (A.y + B.y).is_zero()) {
        num = Q.x - A.x;
        den = F.unit();
    } else {
        Fq lam = (A.x == B.x) ? (F.integer(3) * A.x * A.x + E.a()) / (F.integer(2) * A.y)
                              : (B.y - A.y) / (B.x - A.x);
        num = Q.y - A.y - lam * (Q.x - A.x);
        den = C.inf ? F.unit() : Q.x - C.x;
    }
    if (num.is_zero() || den.is_zero()) return std::nullopt;
    return num / den;
}

std::optional<Fq> miller(const Curve& E, const Pt<Fq>& P, const Pt<Fq>& Q, int64_t N) {
    const Field& F = E.field();
    Fq f = F.unit();
    Pt<Fq> T = P;
    int top = 63;
    while (!((N >> top) & 1)) --top;
    for (int bit = top - 1; bit >= 0; --bit) {
        auto l = line_over_vertical(E, T, T, Q);
        if (!l) return std::nullopt;
        f = f * f * *l;
        T = E.dbl(T);
        if ((N >> bit) & 1) {
            auto m = line_over_vertical(E, T, P, Q);
            if (!m) return std::nullopt;
            f = f * *m;
            T = E.add(T, P);
        }
    }
    return f;
}

}  // namespace

Fq weil_pairing(const Curve& E, const Pt<Fq>& P, const Pt<Fq>& Q, int64_t N) {
    const Field& F = E.field();
    if (!E.mul(P, N).inf || !E.mul(Q, N).inf) throw std::invalid_argument("weil_pairing: points are not N-torsion");
    if (F.p() != 0 && N % F.p() == 0) throw std::invalid_argument("weil_pairing: p divides N");
    if (P.inf || Q.inf || P == Q) return F.unit();
    std::mt19937_64 rng(0x5eed + static_cast<uint64_t>(N));
    for (int attempt = 0; attempt < 200; ++attempt) {
        Pt<Fq> S = E.random_point(rng);
        auto a = miller(E, P, E.add(Q, S), N);
        auto b = miller(E, P, S, N);
        auto c = miller(E, Q, E.sub(P, S), N);
        auto d = miller(E, Q, E.neg(S), N);
        if (!a || !b || !c || !d) continue;
        return (*a / *b) / (*c / *d);
    }
    throw std::runtime_error("weil_pairing: no admissible auxiliary point found");
}

Fq weil_pairing_eg(const Curve& E, const EgPoint& x, const EgPoint& y, int64_t N) {
    if (x.size() != y.size()) throw std::invalid_argument("weil_pairing_eg: dimension mismatch");
    Fq r = E.field().unit();
    for (size_t j = 0; j < x.size(); ++j) r = r * weil_pairing(E, x[j], y[j], N);
    return r;
}

EgPoint eg_add(const Curve& E, const EgPoint& a, const EgPoint& b) {
    EgPoint r(a.size());
    for (size_t j = 0; j < a.size(); ++j) r[j] = E.add(a[j], b[j]);
    return r;
}
EgPoint eg_neg(const Curve& E, const EgPoint& a) {
    EgPoint r(a.size());
    for (size_t j = 0; j < a.size(); ++j) r[j] = E.neg(a[j]);
    return r;
}
EgPoint eg_mul(const Curve& E, const EgPoint& a, int64_t n) {
    EgPoint r(a.size());
    for (size_t j = 0; j < a.size(); ++j) r[j] = E.mul(a[j], n);
    return r;
}
EgPoint eg_zero(size_t g) { return EgPoint(g, Pt<Fq>::infinity()); }
bool eg_is_zero(const EgPoint& a) {
    return std::all_of(a.begin(), a.end(), [](const Pt<Fq>& P) { return P.inf; });
}

uint32_t torsion_field_degree(uint32_t p, int64_t m) {
    // F^d is the identity on E[m] once d = 2e with (-p)^e = 1 mod m.
    int64_t base = ((-static_cast<int64_t>(p)) % m + m) % m, acc = base;
    uint32_t e = 1;
    while (acc % m != 1 % m) {
        acc = acc * base % m;
        ++e;
        if (e > 10000) throw std::runtime_error("torsion_field_degree: no finite order");
    }
    return 2 * e;
}

Fq commutator_pairing(const EndoRing& R, const OMat& H, const EgPoint& x, const EgPoint& y, int64_t N) {
    return weil_pairing_eg(R.curve(), x, R.apply_matrix(H, y), N);
}

namespace {

int64_t dlog(const Fq& z, const Fq& zeta, int64_t N) {
    Fq acc = z.F->unit();
    for (int64_t e = 0; e < N; ++e) {
        if (acc == z) return e;
        acc = acc * zeta;
    }
    throw std::runtime_error("dlog: value is not a power of the fixed root of unity");
}

int64_t md(int64_t a, int64_t N) { return ((a % N) + N) % N; }

int64_t inv_mod(int64_t a, int64_t N) {
    for (int64_t b = 1; b < N; ++b)
        if (md(a * b, N) == 1) return b;
    throw std::runtime_error("inv_mod: not a unit");
}

}  // namespace

TorsionFrame torsion_frame(const EndoRing& R, const OMat& H, int64_t N) {
    const Curve& E = R.curve();
    const Field& F = E.field();
    const size_t g = H.rows;
    auto tors2N = E.torsion(2 * N);
    if (static_cast<int64_t>(tors2N.size()) != 4 * N * N) {
        std::ostringstream os;
        os << "torsion_frame: E[" << 2 * N << "] is not rational over F_" << F.p() << "^" << F.k()
           << "; it becomes rational over F_" << F.p() << "^" << torsion_field_degree(F.p(), 2 * N);
        throw std::runtime_error(os.str());
    }
    auto torsN = E.torsion(N);
    Pt<Fq> P, Q;
    for (const auto& T : torsN)
        if (E.order(T) == N) {
            P = T;
            break;
        }
    const Fq zeta = F.elem(F.root_of_unity(static_cast<uint32_t>(N)));
    for (const auto& T : torsN) {
        Fq e = weil_pairing(E, P, T, N);
        bool prim = true;
        Fq acc = e;
        for (int64_t k = 1; k < N; ++k) {
            if (acc == F.unit()) prim = false;
            acc = acc * e;
        }
        if (prim) {
            Q = T;
            break;
        }
    }
    if (Q.inf) throw std::runtime_error("torsion_frame: could not find a basis of E[N]");

    const size_t n2 = 2 * g;
    std::vector<EgPoint> gens(n2, eg_zero(g));
    for (size_t j = 0; j < g; ++j) {
        gens[2 * j][j] = P;
        gens[2 * j + 1][j] = Q;
    }
    std::vector<std::vector<int64_t>> G(n2, std::vector<int64_t>(n2));
    for (size_t k = 0; k < n2; ++k)
        for (size_t l = 0; l < n2; ++l) G[k][l] = dlog(commutator_pairing(R, H, gens[k], gens[l], N), zeta, N);
    for (size_t k = 0; k < n2; ++k) {
        if (G[k][k] != 0) throw std::runtime_error("torsion_frame: commutator pairing is not alternating");
        for (size_t l = 0; l < n2; ++l)
            if (md(G[k][l] + G[l][k], N) != 0) throw std::runtime_error("torsion_frame: pairing not antisymmetric");
    }
    using Vec = std::vector<int64_t>;
    auto omega = [&](const Vec& u, const Vec& v) {
        int64_t s = 0;
        for (size_t k = 0; k < n2; ++k)
            for (size_t l = 0; l < n2; ++l) s += u[k] * G[k][l] * v[l];
        return md(s, N);
    };
    std::vector<Vec> pool;
    for (size_t k = 0; k < n2; ++k) {
        Vec e(n2, 0);
        e[k] = 1;
        pool.push_back(e);
    }
    std::vector<Vec> xs, ys;
    while (xs.size() < g) {
        bool found = false;
        for (size_t a = 0; a < pool.size() && !found; ++a)
            for (size_t b = 0; b < pool.size() && !found; ++b) {
                int64_t w = omega(pool[a], pool[b]);
                if (w % 2 == 0) continue;
                Vec x = pool[a], y = pool[b];
                int64_t winv = inv_mod(w, N);
                for (auto& c : y) c = md(c * winv, N);
                std::vector<Vec> rest;
                for (size_t c = 0; c < pool.size(); ++c) {
                    if (c == a || c == b) continue;
                    Vec v = pool[c];
                    int64_t wy = omega(v, y), wx = omega(v, x);
                    for (size_t k = 0; k < n2; ++k) v[k] = md(v[k] - wy * x[k] + wx * y[k], N);
                    rest.push_back(v);
                }
                xs.push_back(x);
                ys.push_back(y);
                pool = std::move(rest);
                found = true;
            }
        if (!found) throw std::runtime_error("torsion_frame: commutator pairing is degenerate on E^g[N]");
    }
    auto to_point = [&](const Vec& v) {
        EgPoint r = eg_zero(g);
        for (size_t k = 0; k < n2; ++k)
            if (v[k]) r = eg_add(E, r, eg_mul(E, gens[k], v[k]));
        return r;
    };
    std::unordered_map<size_t, Pt<Fq>> half;
    for (const auto& T : tors2N) {
        size_t idx = E.point_index(E.dbl(T));
        half.emplace(idx, T);
    }
    auto halve = [&](const EgPoint& x) {
        EgPoint r(g);
        for (size_t j = 0; j < g; ++j) r[j] = half.at(E.point_index(x[j]));
        return r;
    };
    TorsionFrame fr;
    fr.N = N;
    fr.zeta = zeta;
    for (size_t i = 0; i < g; ++i) {
        fr.x.push_back(to_point(xs[i]));
        fr.y.push_back(to_point(ys[i]));
        fr.xh.push_back(halve(fr.x.back()));
        fr.yh.push_back(halve(fr.y.back()));
    }
    for (size_t i = 0; i < g; ++i)
        for (size_t j = 0; j < g; ++j) {
            Fq xy = commutator_pairing(R, H, fr.x[i], fr.y[j], N);
            if (xy != (i == j ? zeta : F.unit())) throw std::logic_error("torsion_frame: frame is not symplectic");
            if (commutator_pairing(R, H, fr.x[i], fr.x[j], N) != F.unit() ||
                commutator_pairing(R, H, fr.y[i], fr.y[j], N) != F.unit())
                throw std::logic_error("torsion_frame: frame subspaces are not isotropic");
        }
    return fr;
}

// ---------------------------------------------------------------------------
// Divisors

OMat CDDivisor::row(size_t m) const {
    OMat r(1, phi.cols);
    for (size_t j = 0; j < phi.cols; ++j) r(0, j) = phi(m, j);
    return r;
}

OMat CDDivisor::induced_polarization(const Order& O) const {
    OMat scaled = phi;
    for (size_t m = 0; m < phi.rows; ++m) {
        int64_t c = 1;
        for (uint32_t e = 0; e < (m < n.size() ? n[m] : 0); ++e) c *= O.cm().p;
        for (size_t j = 0; j < phi.cols; ++j) scaled(m, j) = O.scale(phi(m, j), c);
    }
    return omat_mul(O, omat_conj_transpose(O, phi), scaled);
}

TranslatedDivisor TranslatedDivisor::make(const EndoRing& R, const CDDivisor& D, const EgPoint& shift) {
    TranslatedDivisor t;
    t.base = &D;
    t.shift = shift;
    t.T = R.apply_matrix(D.phi, shift);
    return t;
}

int64_t divisor_multiplicity_at(const EndoRing& R, const TranslatedDivisor& D, const EgPoint& x) {
    const uint32_t p = R.curve().field().p();
    auto xi = R.apply_matrix(D.base->phi, x);
    int64_t m = 0;
    for (size_t i = 0; i < xi.size(); ++i) {
        if (xi[i] != D.T[i]) continue;
        int64_t w = 1;
        for (uint32_t k = 0; k < D.base->n[i]; ++k) w *= p;
        m += w;
    }
    return m;
}

int e_star(const EndoRing& R, const TranslatedDivisor& D, const EgPoint& x) {
    int64_t d = divisor_multiplicity_at(R, D, x) - divisor_multiplicity_at(R, D, eg_zero(x.size()));
    return static_cast<int>(((d % 2) + 2) % 2);
}

std::vector<EgPoint> two_torsion_basis(const Curve& E, const TorsionFrame& fr) {
    std::vector<EgPoint> b;
    const int64_t h = fr.N / 2;
    for (const auto& x : fr.x) b.push_back(eg_mul(E, x, h));
    for (const auto& y : fr.y) b.push_back(eg_mul(E, y, h));
    return b;
}

EgPoint two_torsion_point(const Curve& E, const std::vector<EgPoint>& basis, uint32_t bits) {
    EgPoint r = eg_zero(basis.front().size());
    for (size_t k = 0; k < basis.size(); ++k)
        if ((bits >> k) & 1) r = eg_add(E, r, basis[k]);
    return r;
}

std::vector<std::vector<int>> e_star_matrix(const EndoRing& R, const TranslatedDivisor& D,
                                            const std::vector<EgPoint>& basis) {
    const Curve& E = R.curve();
    const size_t n = basis.size();
    std::vector<int> qe(n);
    for (size_t i = 0; i < n; ++i) qe[i] = e_star(R, D, basis[i]);
    std::vector<std::vector<int>> X(n, std::vector<int>(n, 0));
    for (size_t i = 0; i < n; ++i) {
        X[i][i] = qe[i];
        for (size_t j = i + 1; j < n; ++j) {
            int qij = e_star(R, D, eg_add(E, basis[i], basis[j]));
            X[i][j] = (qij + qe[i] + qe[j]) % 2;
        }
    }
    return X;
}

static bool is_normal_form(const std::vector<std::vector<int>>& X) {
    const size_t n = X.size(), g = n / 2;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            int want = (i < g && j == i + g) ? 1 : 0;
            if (X[i][j] != want) return false;
        }
    return true;
}

EgPoint normalizing_point(const EndoRing& R, const CDDivisor& Dr, const std::vector<EgPoint>& basis) {
    const Curve& E = R.curve();
    std::vector<EgPoint> hits;
    for (uint32_t bits = 0; bits < (1u << basis.size()); ++bits) {
        EgPoint P = two_torsion_point(E, basis, bits);
        auto D = TranslatedDivisor::make(R, Dr, P);
        if (is_normal_form(e_star_matrix(R, D, basis))) hits.push_back(P);
    }
    if (hits.size() != 1) {
        std::ostringstream os;
        os << "normalizing_point: expected exactly one translate in normal form, found " << hits.size();
        throw std::runtime_error(os.str());
    }
    return hits.front();
}

EgPoint rational_equiv_translate(const EndoRing& R, const CDDivisor& D1, const CDDivisor& D2,
                                 const std::vector<EgPoint>& basis,
                                 const std::function<bool(const EgPoint&)>& oracle) {
    const Order& O = R.order();
    if (!(D1.induced_polarization(O) == D2.induced_polarization(O)))
        throw std::invalid_argument("rational_equiv_translate: divisors induce different polarizations");
    const Curve& E = R.curve();
    for (uint32_t bits = 0; bits < (1u << basis.size()); ++bits) {
        EgPoint P = two_torsion_point(E, basis, bits);
        if (oracle(P)) return P;
    }
    throw std::runtime_error("rational_equiv_translate: no 2-torsion translate is linearly equivalent");
}

}  // namespace st

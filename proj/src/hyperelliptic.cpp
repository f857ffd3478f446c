#include "supertheta/hyperelliptic.hpp"

#include <sstream>
#include <stdexcept>

namespace st {

namespace {

using Poly = std::vector<Fq>;

void trim(Poly& a) {
    while (!a.empty() && a.back().is_zero()) a.pop_back();
}

Poly poly_mod(Poly a, const Poly& b) {
    trim(a);
    Fq lead_inv = b.back().inv();
    while (a.size() >= b.size()) {
        Fq c = a.back() * lead_inv;
        size_t shift = a.size() - b.size();
        for (size_t i = 0; i < b.size(); ++i) a[shift + i] -= c * b[i];
        trim(a);
    }
    return a;
}

size_t gcd_degree(Poly a, Poly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly r = poly_mod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return a.empty() ? 0 : a.size() - 1;
}

uint32_t vp(int64_t n, uint32_t p) {
    if (n == 0) return UINT32_MAX;
    uint32_t v = 0;
    if (n < 0) n = -n;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

int64_t ipow(int64_t b, uint32_t e) {
    int64_t r = 1;
    while (e--) r *= b;
    return r;
}

}  // namespace

size_t HyperellipticCurve::degree() const {
    Poly g = f;
    trim(g);
    return g.empty() ? 0 : g.size() - 1;
}

void HyperellipticCurve::validate() const {
    size_t d = degree();
    if (d != 5 && d != 6) throw std::invalid_argument("hyperelliptic curve: f must have degree 5 or 6");
    Poly df(d, F->zero());
    for (size_t i = 1; i <= d; ++i) df[i - 1] = F->integer(static_cast<int64_t>(i)) * f[i];
    if (gcd_degree(f, df) > 0) throw std::invalid_argument("hyperelliptic curve: singular model (repeated root)");
}

HyperellipticCurve rosenhain_curve(const std::array<Fq, 3>& l) {
    const Field* F = l[0].F;
    Poly f{F->unit()};
    for (Fq r : {F->zero(), F->unit(), l[0], l[1], l[2]}) {
        Poly g(f.size() + 1, F->zero());
        for (size_t i = 0; i < f.size(); ++i) {
            g[i + 1] += f[i];
            g[i] -= r * f[i];
        }
        f = std::move(g);
    }
    return {F, f};
}

uint32_t definition_degree(const HyperellipticCurve& C) {
    const Field& F = *C.F;
    for (uint32_t d = 1; d <= F.k(); ++d) {
        if (F.k() % d) continue;
        bool ok = true;
        for (const auto& c : C.f) ok = ok && F.frob(c.r, d) == c.r;
        if (ok) return d;
    }
    return F.k();
}

LPolynomial l_polynomial(const HyperellipticCurve& C) {
    C.validate();
    const Field& F = *C.F;
    LPolynomial L;
    L.p = F.p();
    L.d = definition_degree(C);
    if (F.k() % (2 * L.d)) {
        std::ostringstream os;
        os << "l_polynomial: ambient field F_{" << F.p() << "^" << F.k() << "} does not contain F_{q^2} for q = "
           << F.p() << "^" << L.d;
        throw std::runtime_error(os.str());
    }
    const size_t deg = C.degree();
    // Elements of the subfield F_Q are 0 and g^{j m}, m = (#F - 1)/(Q - 1);
    // such an element is a square in F_Q iff j is even.
    auto count = [&](uint32_t e) {
        const int64_t Q = ipow(F.p(), e);
        const uint64_t m = (static_cast<uint64_t>(F.q()) - 1) / static_cast<uint64_t>(Q - 1);
        auto chi = [&](const Fq& a) -> int64_t {
            if (a.is_zero()) return 0;
            return ((a.r - 1) / m) % 2 == 0 ? 1 : -1;
        };
        auto eval = [&](const Fq& x) {
            Fq acc = F.zero();
            for (size_t i = C.f.size(); i-- > 0;) acc = acc * x + C.f[i];
            return acc;
        };
        int64_t n = 1 + chi(eval(F.zero()));
        for (int64_t j = 0; j < Q - 1; ++j) n += 1 + chi(eval(F.elem(static_cast<uint32_t>(1 + j * m))));
        n += (deg == 5) ? 1 : 1 + chi(C.f[6]);
        return n;
    };
    const int64_t q = ipow(F.p(), L.d);
    L.N1 = count(L.d);
    L.N2 = count(2 * L.d);
    const int64_t s1 = q + 1 - L.N1, s2 = q * q + 1 - L.N2;
    L.c1 = -s1;
    L.c2 = (s1 * s1 - s2) / 2;
    return L;
}

bool is_supersingular(const LPolynomial& L) {
    uint32_t v1 = vp(L.c1, L.p), v2 = vp(L.c2, L.p);
    bool ok1 = v1 == UINT32_MAX || 2 * static_cast<uint64_t>(v1) >= L.d;
    bool ok2 = v2 == UINT32_MAX || v2 >= L.d;
    return ok1 && ok2;
}

bool verify_supersingular(const HyperellipticCurve& C) { return is_supersingular(l_polynomial(C)); }

}  // namespace st

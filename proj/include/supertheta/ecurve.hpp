#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "supertheta/ffield.hpp"
#include "supertheta/order.hpp"
#include "supertheta/series.hpp"

namespace st {

// Affine point or the point at infinity, with coordinates in a ring R (a
// field, a Laurent series ring, ...).
template <class R>
struct Pt {
    bool inf = true;
    R x{}, y{};

    Pt() = default;
    Pt(R x_, R y_) : inf(false), x(std::move(x_)), y(std::move(y_)) {}
    static Pt infinity() { return Pt(); }
};

inline bool operator==(const Pt<Fq>& a, const Pt<Fq>& b) {
    if (a.inf || b.inf) return a.inf == b.inf;
    return a.x == b.x && a.y == b.y;
}
inline bool operator!=(const Pt<Fq>& a, const Pt<Fq>& b) { return !(a == b); }

using EgPoint = std::vector<Pt<Fq>>;
using EgLaurent = std::vector<Pt<Laurent>>;

// The curve y^2 = x^3 + a x + b over a finite field.
class Curve {
public:
    static std::shared_ptr<const Curve> make(FieldPtr F, Fq a, Fq b);

    const Field& field() const { return *F_; }
    const FieldPtr& field_ptr() const { return F_; }
    Fq a() const { return a_; }
    Fq b() const { return b_; }

    bool on_curve(const Pt<Fq>& P) const;
    Fq rhs(const Fq& x) const { return x * x * x + a_ * x + b_; }

    template <class R>
    Pt<R> neg(const Pt<R>& P) const {
        if (P.inf) return P;
        return Pt<R>(P.x, -P.y);
    }

    template <class R>
    Pt<R> add(const Pt<R>& P, const Pt<R>& Q) const {
        if (P.inf) return Q;
        if (Q.inf) return P;
        R dx = Q.x - P.x;
        if (dx.is_zero()) {
            R sy = Q.y + P.y;
            if (sy.is_zero()) return Pt<R>::infinity();
            return dbl(P);
        }
        R lam = (Q.y - P.y) / dx;
        R x3 = lam * lam - P.x - Q.x;
        R y3 = lam * (P.x - x3) - P.y;
        return Pt<R>(std::move(x3), std::move(y3));
    }

    template <class R>
    Pt<R> sub(const Pt<R>& P, const Pt<R>& Q) const {
        return add(P, neg(Q));
    }

    template <class R>
    Pt<R> dbl(const Pt<R>& P) const {
        if (P.inf) return P;
        if (P.y.is_zero()) return Pt<R>::infinity();
        R three_x2 = scale_by(P.x * P.x, F_->from_int(3));
        R num = three_x2 + scale_by(one_like(P.x), a_.r);
        R lam = num / scale_by(P.y, F_->from_int(2));
        R x3 = lam * lam - scale_by(P.x, F_->from_int(2));
        R y3 = lam * (P.x - x3) - P.y;
        return Pt<R>(std::move(x3), std::move(y3));
    }

    template <class R>
    Pt<R> mul(const Pt<R>& P, int64_t n) const {
        if (n < 0) return mul(neg(P), -n);
        Pt<R> acc = Pt<R>::infinity();
        Pt<R> b = P;
        while (n) {
            if (n & 1) acc = add(acc, b);
            n >>= 1;
            if (n) b = dbl(b);
        }
        return acc;
    }

    // All points of E(F_q), the point at infinity first, then by x-index.
    const std::vector<Pt<Fq>>& points() const;
    size_t point_index(const Pt<Fq>& P) const;
    Pt<Fq> random_point(std::mt19937_64& rng) const;
    // Points killed by n.
    std::vector<Pt<Fq>> torsion(int64_t n) const;
    // Order of a point (divides #E).
    int64_t order(const Pt<Fq>& P) const;

    Pt<Laurent> to_laurent(const Pt<Fq>& P, size_t len = Laurent::kDefaultLength) const;
    // The point of the formal group with parameter z = -x/y equal to c*s.
    Pt<Laurent> formal_point(uint32_t c, size_t len = Laurent::kDefaultLength) const;
    // Coefficients of w(z) = -1/y as a power series in z = -x/y.
    const std::vector<uint32_t>& formal_w() const;

private:
    FieldPtr F_;
    Fq a_, b_;
    mutable std::vector<Pt<Fq>> points_;
    mutable std::unordered_map<uint64_t, size_t> index_;
    mutable std::vector<uint32_t> w_;
    // The caches fill on first use; the flags make that safe under OpenMP.
    mutable std::once_flag points_once_, w_once_;
    void enumerate_points() const;
    void expand_formal_w() const;
    static uint64_t key(const Pt<Fq>& P) { return P.inf ? ~0ull : (uint64_t(P.x.r) << 32) | P.y.r; }
};

using CurvePtr = std::shared_ptr<const Curve>;

// Rational map (x, y) -> (xn(x)/xd(x), y * yn(x)/yd(x)); polynomial
// coefficients are listed constant term first.
struct RatMap {
    std::vector<uint32_t> xn{0, 1}, xd{1}, yn{1}, yd{1};

    template <class R>
    static R poly_eval(const std::vector<uint32_t>& c, const R& x) {
        R acc = zero_like(x);
        for (size_t i = c.size(); i-- > 0;) acc = acc * x + scale_by(one_like(x), c[i]);
        return acc;
    }

    template <class R>
    Pt<R> apply(const Pt<R>& P) const {
        if (P.inf) return P;
        R den = poly_eval(xd, P.x);
        if (den.is_zero()) return Pt<R>::infinity();
        R nx = poly_eval(xn, P.x) / den;
        R ny = P.y * poly_eval(yn, P.x) / poly_eval(yd, P.x);
        return Pt<R>(std::move(nx), std::move(ny));
    }
};

// Endomorphisms of E given by the CM generator w and the Frobenius F as
// rational maps; elements of the order are evaluated through integral
// coordinates a0 + a1 w + (b0 + b1 w) F.
class EndoRing {
public:
    EndoRing(CurvePtr E, Order O, RatMap w_map, RatMap frob_map);

    const Curve& curve() const { return *E_; }
    const CurvePtr& curve_ptr() const { return E_; }
    const Order& order() const { return O_; }
    const RatMap& w_map() const { return w_; }
    const RatMap& frob_map() const { return f_; }

    // The frobenius map x -> x^p, y -> y^p written as a rational map.
    static RatMap frobenius_map(const Curve& E);

    template <class R>
    Pt<R> eval(const OElem& a, const Pt<R>& P) const {
        int64_t c[4];
        coords(a, c);
        const Curve& E = *E_;
        Pt<R> acc = Pt<R>::infinity();
        if (c[0]) acc = E.add(acc, E.mul(P, c[0]));
        if (c[1]) acc = E.add(acc, E.mul(w_.apply(P), c[1]));
        if (c[2] || c[3]) {
            Pt<R> FP = f_.apply(P);
            if (c[2]) acc = E.add(acc, E.mul(FP, c[2]));
            if (c[3]) acc = E.add(acc, E.mul(w_.apply(FP), c[3]));
        }
        return acc;
    }

    // Row-by-column application of an s x t matrix to a t-tuple of points.
    template <class R>
    std::vector<Pt<R>> apply_matrix(const OMat& M, const std::vector<Pt<R>>& P) const {
        if (P.size() != M.cols) throw std::invalid_argument("apply_matrix: dimension mismatch");
        std::vector<Pt<R>> out(M.rows);
        for (size_t i = 0; i < M.rows; ++i) {
            Pt<R> acc = Pt<R>::infinity();
            for (size_t j = 0; j < M.cols; ++j) {
                if (M(i, j).is_zero()) continue;
                acc = E_->add(acc, eval(M(i, j), P[j]));
            }
            out[i] = acc;
        }
        return out;
    }

    // Checks additivity and the defining relations on random points; throws
    // std::invalid_argument naming the failed relation.
    void validate(std::mt19937_64& rng, int samples = 50) const;

private:
    void coords(const OElem& a, int64_t* c) const;
    CurvePtr E_;
    Order O_;
    RatMap w_, f_;
};

// ---------------------------------------------------------------------------
// Weil pairing and torsion frames.

// e_N(P, Q) by Miller's algorithm with a random auxiliary shift.
Fq weil_pairing(const Curve& E, const Pt<Fq>& P, const Pt<Fq>& Q, int64_t N);
// Product pairing on E^g[N].
Fq weil_pairing_eg(const Curve& E, const EgPoint& x, const EgPoint& y, int64_t N);

EgPoint eg_add(const Curve& E, const EgPoint& a, const EgPoint& b);
EgPoint eg_neg(const Curve& E, const EgPoint& a);
EgPoint eg_mul(const Curve& E, const EgPoint& a, int64_t n);
EgPoint eg_zero(size_t g);
bool eg_is_zero(const EgPoint& a);

struct TorsionFrame {
    int64_t N = 4;
    Fq zeta;                      // the fixed primitive N-th root of unity
    std::vector<EgPoint> x, y;    // symplectic basis of E^g[N]
    std::vector<EgPoint> xh, yh;  // halves: 2 xh[i] = x[i]
};

// Smallest extension degree d of the prime field with E[m] defined over
// F_{p^d}, for a curve over F_p with F^2 = -p.
uint32_t torsion_field_degree(uint32_t p, int64_t m);

// [x, y] = (x, gamma(H) y); with (.,.) the product Weil pairing.
Fq commutator_pairing(const EndoRing& R, const OMat& H, const EgPoint& x, const EgPoint& y, int64_t N);

// Symplectic basis for the commutator pairing: [x_i, y_j] = zeta^{delta_ij}
// and [x_i, x_j] = [y_i, y_j] = 1, together with halving points in E^g[2N].
TorsionFrame torsion_frame(const EndoRing& R, const OMat& H, int64_t N = 4);

// ---------------------------------------------------------------------------
// Completely decomposed divisors.

// D = sum_m p^{n_m} ker(xi_m), xi_m the m-th row of Phi.
struct CDDivisor {
    OMat phi;                  // g x g
    std::vector<uint32_t> n;   // exponents
    std::string name;

    size_t g() const { return phi.rows; }
    OMat row(size_t m) const;
    // Phi^* diag(p^{n_m}) Phi, the polarization the divisor induces.
    OMat induced_polarization(const Order& O) const;
};

// The translate D + P = {R : xi_m(R) = T_m}, T_m = xi_m(P).
struct TranslatedDivisor {
    const CDDivisor* base = nullptr;
    EgPoint shift;
    std::vector<Pt<Fq>> T;

    static TranslatedDivisor make(const EndoRing& R, const CDDivisor& D, const EgPoint& shift);
};

// sum_m p^{n_m} [xi_m(x) = T_m].
int64_t divisor_multiplicity_at(const EndoRing& R, const TranslatedDivisor& D, const EgPoint& x);
// e_*(x) = (-1)^{m(x) - m(0)} as 0 (for +1) or 1 (for -1).
int e_star(const EndoRing& R, const TranslatedDivisor& D, const EgPoint& x);

// Basis (2x_1..2x_g, 2y_1..2y_g) of E^g[2] from a level-4 frame, or the frame
// itself at level 2.
std::vector<EgPoint> two_torsion_basis(const Curve& E, const TorsionFrame& fr);
EgPoint two_torsion_point(const Curve& E, const std::vector<EgPoint>& basis, uint32_t bits);

// Upper triangular matrix X over F_2 with e_*(v) = (-1)^{v^T X v} in the given basis.
std::vector<std::vector<int>> e_star_matrix(const EndoRing& R, const TranslatedDivisor& D,
                                            const std::vector<EgPoint>& basis);

// The unique P in E^g[2] such that e_* of D_r + P has matrix [[0, I], [0, 0]].
EgPoint normalizing_point(const EndoRing& R, const CDDivisor& Dr, const std::vector<EgPoint>& basis);

// Search over E^g[2] for P with t_P(D1) linearly equivalent to the target;
// the oracle decides equivalence.  Throws when the divisors induce different
// polarizations or no candidate passes.
EgPoint rational_equiv_translate(const EndoRing& R, const CDDivisor& D1, const CDDivisor& D2,
                                 const std::vector<EgPoint>& basis,
                                 const std::function<bool(const EgPoint&)>& oracle);

}  // namespace st

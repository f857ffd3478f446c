#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "supertheta/comod.hpp"
#include "supertheta/ecurve.hpp"
#include "supertheta/linalg.hpp"
#include "supertheta/series.hpp"

namespace st {

// Functions are represented by their evaluators on points with Laurent series
// coordinates.  An exact point is passed as a length-1 series, a point on a
// formal line as a longer one; constants inside the evaluators are stored at
// full length so that they never limit the precision of the result.  Poles at
// exact points surface as std::domain_error from the series inverse.
using EFn = std::function<Laurent(const Pt<Laurent>&)>;
using EgFn = std::function<Laurent(const EgLaurent&)>;

EgLaurent to_laurent(const Curve& E, const EgPoint& P, size_t len = Laurent::kMaxLength);
EgLaurent eg_add(const Curve& E, const EgLaurent& a, const EgLaurent& b);
EgLaurent eg_sub(const Curve& E, const EgLaurent& a, const EgLaurent& b);

// Value at an exact point; throws std::domain_error at a pole.
Fq value_at(const EFn& f, const Curve& E, const Pt<Fq>& P);
Fq value_at(const EgFn& f, const Curve& E, const EgPoint& P);

// Order of vanishing at T, read off along T + formal(c s).
int64_t order_at(const EFn& f, const Curve& E, const Pt<Fq>& T, uint32_t c, size_t len = 32);
// Order of f along the line R(s) = P + formal(gamma s) at s = 0.
int64_t order_along(const EgFn& f, const Curve& E, const EgPoint& P, const std::vector<uint32_t>& gamma,
                    size_t len = 32);

// The point P + formal(gamma_j s) componentwise.
EgLaurent formal_line(const Curve& E, const EgPoint& P, const std::vector<uint32_t>& gamma, size_t len);

// ---------------------------------------------------------------------------
// Functions on E

using EDivisor = std::vector<std::pair<Pt<Fq>, int64_t>>;

// A product of chord, tangent and vertical lines with integer exponents.
class EllipticFunction {
public:
    struct Factor {
        bool vertical = false;
        Fq x0, y0, lambda;  // y - y0 - lambda (x - x0), or x - x0 when vertical
        int64_t e = 1;
    };

    EllipticFunction() = default;
    EllipticFunction(CurvePtr E, std::vector<Factor> f) : E_(std::move(E)), f_(std::move(f)) {}

    Laurent operator()(const Pt<Laurent>& P) const;
    Fq at(const Pt<Fq>& P) const;
    EFn fn() const;
    const std::vector<Factor>& factors() const { return f_; }

private:
    CurvePtr E_;
    std::vector<Factor> f_;
};

// Miller construction of a function with the given principal divisor.
// Throws std::invalid_argument when the degree or the point sum is nonzero.
EllipticFunction elliptic_function_with_divisor(const CurvePtr& E, const EDivisor& D);

// x^i y^e of the point P - T.
EFn elliptic_monomial(const CurvePtr& E, const Pt<Fq>& T, int i, int e);
// Exponents (i, e) with 2i + 3e <= M: a basis of L(M (O)) in x, y.
std::vector<std::pair<int, int>> riemann_roch_monomials(int64_t M);

// f o xi for a 1 x g row xi over the order.
EgFn pullback(const EndoRing& R, const EFn& f, const OMat& row);
// R -> f(R + Q).
EgFn translate(const EndoRing& R, const EgFn& f, const EgPoint& Q);
EgFn translate(const EndoRing& R, const EgFn& f, const EgLaurent& Q);
// R -> f(n R).
EgFn multiply_argument(const EndoRing& R, const EgFn& f, int64_t n);

// ---------------------------------------------------------------------------
// Section spaces

struct SectionOptions {
    size_t series_length = 48;     // terms used in the q-th power conditions
    int max_rounds = 16;           // random lines tried before giving up
};

// Basis of L(N D) for a translated completely decomposed divisor D with
// ker(gamma(Phi)) inside E^g[F^t].  With q = p^t and Theta' the product
// divisor sum_m p^{n_m} pr_m^*(T_m), L(N D) consists of the f with
// f^q in gamma(Phi)^* L(N q Theta').  The basis element B_j is the q-th root of
// sum_k C_jk phi_k(gamma(Phi) R), phi_k running over products of elliptic
// monomials.
class SectionSpace {
public:
    static SectionSpace build(const EndoRing& R, const TranslatedDivisor& D, uint32_t N, uint32_t t,
                              size_t target, std::mt19937_64& rng, const SectionOptions& opt = {});

    size_t dim() const { return C_.rows; }
    uint32_t level() const { return N_; }
    size_t ambient_dim() const { return C_.cols; }
    const Mat& coefficients() const { return C_; }
    const TranslatedDivisor& divisor() const { return D_; }

    // phi_k(gamma(Phi) P) for all k.
    std::vector<Laurent> eval_ambient(const EgLaurent& P) const;
    std::vector<Laurent> eval_basis(const EgLaurent& P) const;
    std::vector<Fq> eval_basis(const EgPoint& P) const;
    Laurent eval(const std::vector<uint32_t>& a, const EgLaurent& P) const;
    EgFn function(const std::vector<uint32_t>& a) const;
    EgFn basis_function(size_t j) const;

    // Coordinates of f in the basis, fitted at random exact points; throws
    // std::runtime_error when f does not lie in the span.
    std::vector<uint32_t> coordinates(const EgFn& f, std::mt19937_64& rng) const;

private:
    const EndoRing* R_ = nullptr;
    TranslatedDivisor D_;
    uint32_t N_ = 1, t_ = 1;
    std::vector<std::vector<std::pair<int, int>>> mono_;  // per component
    std::vector<std::vector<uint16_t>> index_;            // ambient k -> monomial per component
    std::vector<Pt<Fq>> T_;
    Mat C_;
};

// Random exact points R with xi(R) = T for a 1 x g row xi.
std::vector<EgPoint> component_points(const EndoRing& R, const OMat& row, const Pt<Fq>& T, size_t count,
                                      std::mt19937_64& rng);
// Random exact point of E^g off the divisor D.
EgPoint generic_point(const EndoRing& R, const TranslatedDivisor& D, std::mt19937_64& rng);
// True when x lies on some component of D.
bool on_divisor(const EndoRing& R, const TranslatedDivisor& D, const EgPoint& x);

// A function g in L(D) with div g = D' - D for D' = D_i + shift, found as the
// unique element of L(D) vanishing on D'.
struct RelatingFunction {
    EgPoint shift;
    std::vector<uint32_t> coeffs;
    EgFn g;
};

// Null when L(D) has no nonzero element vanishing on Di + shift, otherwise the
// relating function.  Throws if the vanishing space has dimension above 1.
std::optional<RelatingFunction> relating_function(const EndoRing& R, const SectionSpace& LD, const CDDivisor& Di,
                                                  const EgPoint& shift, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Level structure

// The level element over x in E^g[N] with half x' (2x' = x): rho_x = prod_j
// rho_{x,j}(R + x) / rho_{x,j}(R), with rho_{x,j}(R) = prod_m (X(xi_m R - T_m)
// - X(xi_m a_j))^{p^{n_m}} and a_j = x' + j x for j = 0 .. N/2 - 1.
struct LevelElement {
    EgPoint x, half;
    int64_t N = 4;
    std::vector<EgFn> rho_j;
    EgFn rho;
};

LevelElement level_function(const EndoRing& R, const TranslatedDivisor& D, const EgPoint& x, const EgPoint& half,
                            int64_t N);
// U_x G (R) = rho_x(R - x) G(R - x).
EgFn level_action(const EndoRing& R, const LevelElement& L, const EgFn& G);
// Applies the letters right to left: word {a, b} gives U_a(U_b(G)).
EgFn level_action(const EndoRing& R, const std::vector<const LevelElement*>& word, const EgFn& G);

// ---------------------------------------------------------------------------
// Comodule on sections

// Data of a maximal isotropic M(H) with its splitting over the divisor kernels:
// dirs[i] holds the formal parameters (per factor of E^g) of h_i at the
// universal point x_0, and mult[i] the relating function g_i (empty for the
// reference divisor, where g_i = 1).
struct SplitHData {
    std::vector<std::vector<uint32_t>> dirs;
    std::vector<EgFn> mult;
};

struct SectionComodule {
    WittComodule C;
    Laurent shuffle;                // sh(sigma h, sigma h / 2) as a series in x_0
    std::vector<Mat> coeff;         // c_W = sum_e coeff[e] x_0^e
};

// U_{h_1} ... U_{h_r} evaluated at P + nothing: the series in s = x_0 of
// (U_{h_1}(...U_{h_r} f))(P) at level N.
Laurent translated_chain(const EndoRing& R, const SplitHData& H, const std::vector<size_t>& order, uint32_t N,
                         const EgFn& f, const EgPoint& P, size_t len);

// Shuffle factor: square root with constant term 1 of the quotient of the two
// orderings, modulo s^p.  Throws when the quotient depends on the point or the
// function.
Laurent shuffle_factor(const EndoRing& R, const SectionSpace& S, const SplitHData& H, std::mt19937_64& rng,
                       size_t len);

SectionComodule comodule_on_sections(const EndoRing& R, const SectionSpace& S, const SplitHData& H,
                                     std::mt19937_64& rng, size_t len = 24);

// Basis of the invariant subspace (columns), computed as the common kernel of
// the operator tuple and cross-checked against invariant_vector_full.
Mat invariant_sections(const SectionComodule& C);
// The invariant section for a one dimensional invariant space; throws
// otherwise.
std::vector<uint32_t> invariant_section(const SectionComodule& C);

// ---------------------------------------------------------------------------
// Evaluation

// A function with divisor [2]^*(T) - 4(T) on E for T in E[2].
EllipticFunction duplication_function(const CurvePtr& E, const Pt<Fq>& T);
// rho_2 with divisor [2]^{-1} D - 4 D.
EgFn rho2(const EndoRing& R, const TranslatedDivisor& D);
// Local equation of D at 0: product over the components through 0 of z(xi_m R)^{p^{n_m}}.
EgFn local_equation_at_zero(const EndoRing& R, const TranslatedDivisor& D);

// ev_0(f) = (f u^N)(0) read off along R(s) = formal(c s); throws
// std::domain_error when the product still has a pole or the constant term is
// beyond the known precision.
Fq ev0(const EndoRing& R, const TranslatedDivisor& D, uint32_t N, const EgFn& f, const std::vector<uint32_t>& c,
       size_t len);

}  // namespace st

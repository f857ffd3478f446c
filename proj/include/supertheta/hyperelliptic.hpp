#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "supertheta/ffield.hpp"

namespace st {

// y^2 = f(x) with f of degree 5 or 6, coefficients constant term first.
struct HyperellipticCurve {
    const Field* F = nullptr;
    std::vector<Fq> f;

    size_t degree() const;
    // Throws std::invalid_argument unless f is squarefree of degree 5 or 6.
    void validate() const;
};

// y^2 = x (x - 1)(x - l1)(x - l2)(x - l3).
HyperellipticCurve rosenhain_curve(const std::array<Fq, 3>& l);

// Smallest d with every coefficient in F_{p^d}.
uint32_t definition_degree(const HyperellipticCurve& C);

// Frobenius data over F_q, q = p^d with d = definition_degree: point counts
// over F_q and F_{q^2} and L(T) = 1 + c1 T + c2 T^2 + q c1 T^3 + q^2 T^4.
struct LPolynomial {
    uint32_t p = 0, d = 0;
    int64_t N1 = 0, N2 = 0;
    int64_t c1 = 0, c2 = 0;
};

// Counts points by enumeration inside the ambient field, which must contain
// F_{q^2}; throws std::runtime_error otherwise.
LPolynomial l_polynomial(const HyperellipticCurve& C);

// True iff every slope of the Newton polygon of L(T) is 1/2, i.e.
// v_p(c1) >= d/2 and v_p(c2) >= d.
bool is_supersingular(const LPolynomial& L);
bool verify_supersingular(const HyperellipticCurve& C);

}  // namespace st

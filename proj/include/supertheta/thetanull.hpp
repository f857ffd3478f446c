#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "supertheta/ffield.hpp"
#include "supertheta/linalg.hpp"

namespace st {

// Elements of Z_delta = (Z/N)^g are stored as integer vectors in [0, N);
// flattened indices put the first coordinate in the lowest digit.
size_t zn_index(const std::vector<int64_t>& x, int64_t N);
std::vector<int64_t> zn_vector(size_t idx, size_t g, int64_t N);
size_t zn_size(size_t g, int64_t N);

// The finite Heisenberg group G(delta) for delta = (N, ..., N).  A character
// chi of Z_delta is stored as the vector c with chi(y) = zeta^{c . y}, where
// zeta is a fixed primitive N-th root of unity.
struct HeisenbergGroup {
    const Field* F = nullptr;
    size_t g = 0;
    int64_t N = 0;
    Fq zeta;

    struct Elem {
        Fq s;
        std::vector<int64_t> x, chi;
    };

    HeisenbergGroup(const Field* F_, size_t g_, int64_t N_, Fq zeta_);

    Elem identity() const;
    Elem make(Fq s, std::vector<int64_t> x, std::vector<int64_t> chi) const;
    // (s, x, chi)(s', x', chi') = (s s' chi'(x), x + x', chi + chi').
    Elem mul(const Elem& a, const Elem& b) const;
    Elem inv(const Elem& a) const;
    bool equal(const Elem& a, const Elem& b) const;
    Fq character(const std::vector<int64_t>& chi, const std::vector<int64_t>& y) const;

    // (U_{s,x,chi} f)(y) = s chi(y) f(x + y) on V(delta) = maps Z_delta -> k.
    std::vector<Fq> act(const Elem& a, const std::vector<Fq>& f) const;
    Mat matrix(const Elem& a) const;

    // D_{-1}(s, x, chi) = (s, -x, -chi).
    Elem d_minus1(const Elem& a) const;
};

// E_2 : G(delta) -> G(2 delta), (s, x, chi) -> (s^2, [2] x, r^D chi), and
// H_2 : G(2 delta) -> G(delta), (s, x, chi) -> (s^2, r x, [2]^D chi).  The two
// groups must use compatible roots of unity: big.zeta^2 = small.zeta.
HeisenbergGroup::Elem structural_E2(const HeisenbergGroup& small, const HeisenbergGroup& big,
                                    const HeisenbergGroup::Elem& a);
HeisenbergGroup::Elem structural_H2(const HeisenbergGroup& big, const HeisenbergGroup& small,
                                    const HeisenbergGroup::Elem& a);

struct ThetaNullpoint {
    size_t g = 0;
    int64_t level = 4;     // 2 or 4
    std::vector<Fq> q;     // indexed by zn_index

    bool is_symmetric() const;
};

// Table of theta constants theta_{a,b}, a, b in {0,1}^g, stored at index
// a + 2^g b with a_1 and b_1 in the low bits.  With squares set the entries
// are theta_{a,b}^2.
struct ThetaConstants {
    size_t g = 0;
    bool squares = false;
    std::vector<Fq> v;

    static size_t index(uint32_t a, uint32_t b, size_t g) { return a | (static_cast<size_t>(b) << g); }
    const Fq& at(uint32_t a, uint32_t b) const { return v.at(index(a, b, g)); }
    // Parity of a . b.
    static int parity(uint32_t a, uint32_t b) { return __builtin_popcount(a & b) & 1; }
    // Entrywise square.
    ThetaConstants squared() const;
    // Divided by the first nonzero even entry; throws if every entry is zero.
    ThetaConstants normalized() const;
    bool proportional_to(const ThetaConstants& o) const;
};

// theta_{a,b} = sum_{c in Z_4^g, c = a mod 2} i^{c . b} q(c).  The root i must
// square to -1.
ThetaConstants fourier_theta(const ThetaNullpoint& q4, Fq i);
// Inverse transform: q(a + 2t) = 2^{-g} sum_b i^{-a.b} (-1)^{t.b} theta_{a,b}.
ThetaNullpoint inverse_fourier_theta(const ThetaConstants& th, Fq i);
// theta_{a,b}^2 = sum_{x in Z_2^g} (-1)^{x . b} q(x) q(x + a).
ThetaConstants squares_from_level2(const ThetaNullpoint& q2);
// Indicator of 2 Z_4^g inside V(4).
std::vector<Fq> duplication_image(const Field& F, size_t g);
// The Heisenberg elements (1, [2] a, 0) and (1, 0, r^D chi_b) for the basis
// vectors a, b of Z_2^g, at level 4.
std::vector<HeisenbergGroup::Elem> duplication_level_group(const HeisenbergGroup& G4);

struct VanishingProfile {
    std::vector<std::pair<uint32_t, uint32_t>> odd, even;  // vanishing (a, b) by parity
    size_t odd_total = 0;                                   // number of odd characteristics
};
VanishingProfile vanishing_profile(const ThetaConstants& th);

// Rosenhain invariants from the squared even theta constants (g = 2).  With
// theta_i indexed by i = a_1 + 2 a_2 + 4 b_1 + 8 b_2:
//   l1 = t0 t2 / (t1 t3),  l2 = t2 t8 / (t3 t9),  l3 = t0 t8 / (t1 t9),
// where t_i = theta_i^2.  Throws std::runtime_error when an even square
// vanishes and std::logic_error when the output is degenerate.
std::array<Fq, 3> rosenhain_g2(const ThetaConstants& squares);

}  // namespace st

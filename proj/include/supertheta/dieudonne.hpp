#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "supertheta/ffield.hpp"
#include "supertheta/linalg.hpp"
#include "supertheta/order.hpp"
#include "supertheta/witt.hpp"

namespace st {

// W_N(k) for k = F_{p^d}, realized as the Galois ring (Z/p^N)[x]/(f) with f the
// integer lift of the field modulus.  Elements are coefficient vectors with
// entries in [0, p^N).  Conversions to and from Witt coordinates go through
// Teichmueller expansions.
class WRing {
public:
    using Elem = std::vector<int64_t>;

    static std::shared_ptr<const WRing> make(FieldPtr F, uint32_t N);

    const Field& field() const { return *F_; }
    const FieldPtr& field_ptr() const { return F_; }
    uint32_t N() const { return N_; }
    uint32_t p() const { return F_->p(); }
    int64_t modulus() const { return pN_; }

    Elem zero() const { return Elem(d_, 0); }
    Elem one() const;
    Elem integer(int64_t c) const;
    // c/d with d prime to p.
    Elem rational(const mpq_class& c) const;
    Elem p_power(uint32_t v) const;

    Elem add(const Elem& a, const Elem& b) const;
    Elem sub(const Elem& a, const Elem& b) const;
    Elem neg(const Elem& a) const;
    Elem mul(const Elem& a, const Elem& b) const;
    Elem mul_int(const Elem& a, int64_t c) const;
    bool is_zero(const Elem& a) const;
    // p-adic valuation, N for zero.
    uint32_t valuation(const Elem& a) const;
    // a / p^v for v <= valuation(a) (exact on coefficients).
    Elem div_p_power(const Elem& a, uint32_t v) const;
    Elem inv_unit(const Elem& a) const;
    Elem pow(const Elem& a, uint64_t e) const;

    Elem teichmuller(const Fq& c) const;
    Fq residue(const Elem& a) const;
    // Ring automorphism lifting a -> a^p on the residue field.
    Elem sigma(const Elem& a) const;
    Elem sigma_inv(const Elem& a) const;

    Elem from_witt(const WittVec<Fq>& w) const;
    WittVec<Fq> to_witt(const Elem& a) const;

private:
    FieldPtr F_;
    uint32_t N_ = 0, d_ = 0;
    int64_t pN_ = 0;
    std::vector<int64_t> f_;  // monic lift, constant term first, length d+1
    std::vector<Elem> sigma_pows_;  // sigma(x)^j for j < d
    int64_t md(int64_t a) const {
        a %= pN_;
        return a < 0 ? a + pN_ : a;
    }
};

using WRingPtr = std::shared_ptr<const WRing>;
using WVec = std::vector<WRing::Elem>;

// Dense matrix over W_N(k).
struct WMat {
    size_t rows = 0, cols = 0;
    std::vector<WRing::Elem> a;

    WMat() = default;
    WMat(const WRing& W, size_t r, size_t c) : rows(r), cols(c), a(r * c, W.zero()) {}
    WRing::Elem& operator()(size_t i, size_t j) { return a[i * cols + j]; }
    const WRing::Elem& operator()(size_t i, size_t j) const { return a[i * cols + j]; }
};

WMat wmat_identity(const WRing& W, size_t n);
WMat wmat_mul(const WRing& W, const WMat& x, const WMat& y);
WMat wmat_add(const WRing& W, const WMat& x, const WMat& y);
WVec wmat_apply(const WRing& W, const WMat& m, const WVec& v);
bool wmat_equal(const WMat& x, const WMat& y);

// Howell normal form of the row span of a list of vectors over W_N(k).
// Pivot entries are exact powers of p and the span is closed under the
// annihilator trick, so membership is decided by forward reduction.
struct Howell {
    size_t ncols = 0;
    std::vector<WVec> rows;
    std::vector<size_t> pivot_col;
    std::vector<uint32_t> pivot_val;

    static Howell build(const WRing& W, std::vector<WVec> gens, size_t ncols);
    // Length of the span as a W-module.
    uint32_t length(const WRing& W) const;
    bool contains(const WRing& W, WVec v) const;
    // Reduces v modulo the span; zero iff v is in the span.
    WVec reduce(const WRing& W, WVec v) const;
};

// The map Psi: O -> Mat_2(W_N(k)) in the basis (delta, F delta); Psi(F) is
// fixed as [[0,-p],[1,0]] and Psi(w) is validated input.
class PsiMap {
public:
    PsiMap(WRingPtr W, const Order& O, WMat psi_w);

    const WRing& W() const { return *W_; }
    const WRingPtr& W_ptr() const { return W_; }
    const Order& order() const { return O_; }
    const WMat& psi_w() const { return psi_w_; }
    const WMat& psi_f() const { return psi_f_; }

    WMat eval(const OElem& x) const;
    // Blockwise application to an s x t matrix over O.
    WMat extend(const OMat& phi) const;

private:
    WMat scale_mat(const WMat& m, int64_t c) const;
    WRingPtr W_;
    Order O_;
    WMat psi_w_, psi_f_;
};

// Semilinear Frobenius and Verschiebung on the ambient W_N(k)^{2g} with
// coordinates (delta_1, F delta_1, ..., delta_g, F delta_g).
WVec dieudonne_F(const WRing& W, const WVec& v);
WVec dieudonne_V(const WRing& W, const WVec& v);

// A submodule of M(E^g[F^n]) = prod_j W/p^{ceil(n/2)} delta_j + W/p^{floor(n/2)} F delta_j,
// stored through ambient lifts of generators.  The ambient precision N must
// exceed n so that the pairing sees the p^n-divisible part.
struct DieudonneModule {
    WRingPtr W;
    size_t g = 0;
    uint32_t n = 0;
    std::vector<WVec> gens;

    // Relations cutting M(E^g[F^n]) out of the ambient free module.
    std::vector<WVec> relations() const;
    Howell span_with_relations() const;
    uint32_t length() const;
    bool contains(const WVec& v) const;
    bool is_FV_stable() const;
    // F^n acts as zero.
    bool killed_by_F_power(uint32_t e) const;
};

DieudonneModule ambient_module(WRingPtr W, size_t g, uint32_t n);
// M(ker eta) as the kernel of Psi(H) on M(E^g[F^n]).
DieudonneModule kernel_module(const PsiMap& psi, const OMat& H, uint32_t n);
// Kernel of Psi(phi) restricted to the given module (used for the group
// schemes of completely decomposed divisors).
DieudonneModule kernel_in(const PsiMap& psi, const OMat& phi, const DieudonneModule& M);

// u^T J Psi(H) v, whose reduction mod p^n represents the pairing value
// p^{-n} u^T J Psi(H) v in p^{-n}W/W (constant c = 1).
WRing::Elem dieudonne_pairing(const WRing& W, const WMat& psiH, const WVec& u, const WVec& v, uint32_t n);
// Gram matrix over the residue field for a module killed by p: entries are
// the pairing values of the given generators.
// Only n = 1 is supported, where values are residues.
Mat pairing_gram(const WRing& W, const WMat& psiH, const std::vector<WVec>& gens, uint32_t n);

bool is_maximal_isotropic(const DieudonneModule& S, const DieudonneModule& K, const WMat& psiH);

// Splitting of the sum map (+) M(H_i) -> M(ker eta): a matrix sending each
// Howell generator of M(ker eta) to a tuple of elements of the M(H_i).
struct Splitting {
    // sigma[i][j]: component in M(H_i) of the image of generator j of K.
    std::vector<std::vector<WVec>> sigma;
    std::vector<WVec> k_gens;
};
Splitting splitting_sigma(const std::vector<DieudonneModule>& subs, const DieudonneModule& K);

// Cover M(W_{n,n})^a -> M(S) by the generators of S.  Only n = 1 is supported
// (then D_{1,1} = k and the lift is the generator matrix over k).
struct WittCover {
    size_t a = 0;
    Mat lift;  // 2g x a over k for n = 1
};
WittCover witt_cover(const DieudonneModule& S);

}  // namespace st

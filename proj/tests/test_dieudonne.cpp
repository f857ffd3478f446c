#include <random>
#include <set>

#include "doctest.h"
#include "supertheta/dieudonne.hpp"

using namespace st;

namespace {

struct MB {
    FieldPtr F;
    WRingPtr W;
    Order O{CMData{}};
    std::unique_ptr<PsiMap> psi;
    OMat H, phi1, phi2;

    explicit MB(uint32_t N, bool flip_u = false) {
        F = Field::make(3, 4);
        W = WRing::make(F, N);
        uint32_t u = F->sqrt(F->neg(F->one()));
        if (flip_u) u = F->neg(u);
        WMat pw(*W, 2, 2);
        pw(0, 0) = W->teichmuller(F->elem(u));
        pw(1, 1) = W->neg(pw(0, 0));
        psi = std::make_unique<PsiMap>(W, O, pw);
        H = omat_parse(O, {{"3", "(1+i)F"}, {"-(1+i)F", "3"}});
        phi1 = omat_parse(O, {{"0", "-1"}, {"F", "i-1"}});
        phi2 = omat_parse(O, {{"-1", "0"}, {"-1-i", "-iF"}});
    }
};

WVec unit(const WRing& W, size_t dim, size_t i) {
    WVec v(dim, W.zero());
    v[i] = W.one();
    return v;
}

WittVec<Fq> random_witt(const Field& F, size_t n, std::mt19937& rng) {
    WittVec<Fq> w;
    for (size_t i = 0; i < n; ++i) w.push_back(F.elem(rng() % F.q()));
    return w;
}

WRing::Elem random_elem(const WRing& W, std::mt19937& rng) {
    WRing::Elem e = W.zero();
    for (auto& c : e) c = static_cast<int64_t>(rng() % static_cast<uint64_t>(W.modulus()));
    return e;
}

// Brute-force size of the Z/p^N-span of gens in (Z/p^N)^cols, for k = F_p.
size_t brute_span_size(const WRing& W, const std::vector<WVec>& gens, size_t cols) {
    const int64_t M = W.modulus();
    std::set<std::vector<int64_t>> seen;
    std::vector<int64_t> coef(gens.size(), 0);
    for (;;) {
        std::vector<int64_t> v(cols, 0);
        for (size_t g = 0; g < gens.size(); ++g)
            for (size_t c = 0; c < cols; ++c) v[c] = (v[c] + coef[g] * gens[g][c][0]) % M;
        seen.insert(v);
        size_t i = 0;
        while (i < coef.size() && ++coef[i] == M) coef[i++] = 0;
        if (i == coef.size()) break;
    }
    return seen.size();
}

uint64_t ipow(uint64_t b, uint32_t e) {
    uint64_t r = 1;
    while (e--) r *= b;
    return r;
}

}  // namespace

TEST_CASE("W_N(k) arithmetic agrees with Witt vector arithmetic") {
    std::mt19937 rng(7);
    for (uint32_t N : {2u, 3u}) {
        auto F = Field::make(3, 2);
        auto W = WRing::make(F, N);
        for (int it = 0; it < 60; ++it) {
            auto a = random_witt(*F, N, rng), b = random_witt(*F, N, rng);
            auto A = W->from_witt(a), B = W->from_witt(b);
            CHECK(W->to_witt(A) == a);
            CHECK(W->from_witt(witt_add(a, b)) == W->add(A, B));
            CHECK(W->from_witt(witt_mul(a, b)) == W->mul(A, B));
            CHECK(W->from_witt(frobenius(a)) == W->sigma(A));
        }
    }
}

TEST_CASE("Teichmueller lifts and sigma") {
    std::mt19937 rng(11);
    auto F = Field::make(3, 4);
    auto W = WRing::make(F, 4);
    for (int it = 0; it < 40; ++it) {
        Fq c = F->elem(rng() % F->q()), d = F->elem(rng() % F->q());
        CHECK(W->residue(W->teichmuller(c)) == c);
        CHECK(W->mul(W->teichmuller(c), W->teichmuller(d)) == W->teichmuller(c * d));
        CHECK(W->sigma(W->teichmuller(c)) == W->teichmuller(c.pow(3)));
        auto a = random_elem(*W, rng), b = random_elem(*W, rng);
        CHECK(W->sigma(W->mul(a, b)) == W->mul(W->sigma(a), W->sigma(b)));
        CHECK(W->sigma_inv(W->sigma(a)) == a);
        auto s = a;
        for (int i = 0; i < 4; ++i) s = W->sigma(s);
        CHECK(s == a);
        if (W->valuation(a) == 0) CHECK(W->mul(a, W->inv_unit(a)) == W->one());
    }
    CHECK(W->teichmuller(F->elem(F->neg(F->one()))) == W->integer(-1));
    CHECK(W->rational(mpq_class(1, 2)) == W->inv_unit(W->integer(2)));
    CHECK_THROWS_AS(W->rational(mpq_class(1, 3)), std::invalid_argument);
}

TEST_CASE("Howell length and membership against brute-force spans over Z/27") {
    std::mt19937 rng(3);
    auto F = Field::make(3, 1);
    auto W = WRing::make(F, 3);
    for (int it = 0; it < 40; ++it) {
        const size_t cols = 2, ngen = 1 + rng() % 2;
        std::vector<WVec> gens;
        for (size_t g = 0; g < ngen; ++g) {
            WVec v;
            for (size_t c = 0; c < cols; ++c) {
                // bias towards non-units
                int64_t x = static_cast<int64_t>(rng() % 27);
                if (rng() % 2) x = (x * 3) % 27;
                v.push_back(W->integer(x));
            }
            gens.push_back(v);
        }
        Howell h = Howell::build(*W, gens, cols);
        CHECK(ipow(3, h.length(*W)) == brute_span_size(*W, gens, cols));
        for (const auto& g : gens) CHECK(h.contains(*W, g));
        // a random vector is in the span iff the brute-force span is unchanged
        WVec probe = {W->integer(rng() % 27), W->integer(rng() % 27)};
        auto with = gens;
        with.push_back(probe);
        CHECK(h.contains(*W, probe) == (brute_span_size(*W, with, cols) == brute_span_size(*W, gens, cols)));
    }
}

TEST_CASE("kernels of random maps satisfy rank-nullity") {
    std::mt19937 rng(5);
    auto F = Field::make(3, 2);
    auto W = WRing::make(F, 3);
    for (int it = 0; it < 25; ++it) {
        const size_t s = 1 + rng() % 3, t = 1 + rng() % 3;
        WMat A(*W, t, s);
        for (auto& x : A.a) x = rng() % 3 ? W->mul(W->p_power(rng() % 3), random_elem(*W, rng)) : W->zero();
        // rows [A e_j | e_j]; kernel is the part with zero left block
        std::vector<WVec> rows, img;
        for (size_t j = 0; j < s; ++j) {
            WVec e = unit(*W, s, j), row = wmat_apply(*W, A, e);
            img.push_back(row);
            row.insert(row.end(), e.begin(), e.end());
            rows.push_back(row);
        }
        Howell h = Howell::build(*W, rows, t + s);
        std::vector<WVec> ker;
        for (size_t i = 0; i < h.rows.size(); ++i)
            if (h.pivot_col[i] >= t) ker.emplace_back(h.rows[i].begin() + t, h.rows[i].end());
        uint32_t lk = ker.empty() ? 0 : Howell::build(*W, ker, s).length(*W);
        uint32_t li = Howell::build(*W, img, t).length(*W);
        CHECK(lk + li == W->N() * s);
        for (const auto& k : ker) {
            auto z = wmat_apply(*W, A, k);
            for (const auto& x : z) CHECK(W->is_zero(x));
        }
    }
}

TEST_CASE("Psi respects the order relations") {
    MB mb(3);
    const Order& O = mb.O;
    std::mt19937 rng(13);
    auto rnd = [&] {
        OElem x;
        x.a0 = static_cast<long>(rng() % 7) - 3;
        x.a1 = static_cast<long>(rng() % 7) - 3;
        x.b0 = static_cast<long>(rng() % 7) - 3;
        x.b1 = static_cast<long>(rng() % 7) - 3;
        return x;
    };
    for (int it = 0; it < 30; ++it) {
        OElem x = rnd(), y = rnd();
        CHECK(wmat_equal(mb.psi->eval(O.mul(x, y)), wmat_mul(*mb.W, mb.psi->eval(x), mb.psi->eval(y))));
    }
    WMat bad = wmat_identity(*mb.W, 2);
    CHECK_THROWS_AS(PsiMap(mb.W, O, bad), std::invalid_argument);
    // [u] on both diagonal entries squares to -1 but breaks F i = -i F
    WMat same = mb.psi->psi_w();
    same(1, 1) = same(0, 0);
    CHECK_THROWS_AS(PsiMap(mb.W, O, same), std::invalid_argument);
}

TEST_CASE("order arithmetic and parsing") {
    Order O{CMData{}};
    OElem x = O.parse("−7/2·i + 2F + 1/2·iF");
    CHECK(x.a0 == 0);
    CHECK(x.a1 == mpq_class(-7, 2));
    CHECK(x.b0 == 2);
    CHECK(x.b1 == mpq_class(1, 2));
    CHECK_FALSE(x.integral_coords());
    CHECK(x.denominator() == 2);
    CHECK(O.parse(O.to_string(x)) == x);
    CHECK(O.mul(O.frob(), O.frob()) == O.integer(-3));
    CHECK(O.mul(O.w(), O.w()) == O.integer(-1));
    CHECK(O.mul(O.w(), O.frob()) == O.neg(O.mul(O.frob(), O.w())));
    CHECK(O.parse("iF") == O.mul(O.w(), O.frob()));
    CHECK(O.parse("Fi") == O.parse("-iF"));
    CHECK(O.reduced_norm(O.parse("(1+i)F")) == 6);
    CHECK(O.reduced_trace(O.parse("3 + iF")) == 6);
    CHECK_THROWS_AS(O.parse("2 + j"), std::invalid_argument);
    CHECK_THROWS_AS(O.parse("(1+i"), std::invalid_argument);
    CHECK_THROWS_AS(O.parse("1/0"), std::invalid_argument);

    MB mb(3);
    CHECK(omat_is_hermitian(O, mb.H));
    for (const OMat* phi : {&mb.phi1, &mb.phi2})
        CHECK(omat_mul(O, omat_conj_transpose(O, *phi), *phi) == mb.H);
}

TEST_CASE("the MB kernel is a length-2 module with a perfect pairing") {
    for (bool flip : {false, true}) {
        MB mb(3, flip);
        const WRing& W = *mb.W;
        DieudonneModule K = kernel_module(*mb.psi, mb.H, 1);
        CHECK(K.length() == 2);
        CHECK(K.is_FV_stable());
        CHECK(K.killed_by_F_power(1));
        WMat psiH = mb.psi->extend(mb.H);
        std::vector<WVec> basis = {unit(W, 4, 0), unit(W, 4, 2)};
        for (const auto& b : basis) CHECK(K.contains(b));
        Mat G = pairing_gram(W, psiH, basis, 1);
        CHECK(rank(G) == 2);
        CHECK(G(0, 0) == 0);
        CHECK(G(0, 1) == mb.F->neg(G(1, 0)));

        // the kernels of the two MB divisors are the coordinate lines
        DieudonneModule H1 = kernel_in(*mb.psi, mb.phi1, K), H2 = kernel_in(*mb.psi, mb.phi2, K);
        CHECK(H1.length() == 1);
        CHECK(H2.length() == 1);
        CHECK(H1.contains(unit(W, 4, 0)));
        CHECK(H2.contains(unit(W, 4, 2)));
        CHECK(is_maximal_isotropic(H1, K, psiH));
        CHECK(is_maximal_isotropic(H2, K, psiH));
    }
}

TEST_CASE("every line in the MB kernel is maximal isotropic") {
    MB mb(3);
    const WRing& W = *mb.W;
    const Field& F = *mb.F;
    DieudonneModule K = kernel_module(*mb.psi, mb.H, 1);
    WMat psiH = mb.psi->extend(mb.H);
    auto line = [&](uint32_t a, uint32_t b) {
        DieudonneModule S;
        S.W = mb.W;
        S.g = 2;
        S.n = 1;
        WVec v(4, W.zero());
        v[0] = W.teichmuller(F.elem(a));
        v[2] = W.teichmuller(F.elem(b));
        S.gens.push_back(v);
        return S;
    };
    size_t count = 0;
    for (uint32_t b = 0; b < F.q(); ++b) count += is_maximal_isotropic(line(1, b), K, psiH);
    count += is_maximal_isotropic(line(0, 1), K, psiH);
    CHECK(count == F.q() + 1);
    // the whole kernel is not isotropic
    CHECK_FALSE(is_maximal_isotropic(K, K, psiH));
    // rescaling a generator by a unit does not change isotropy
    DieudonneModule S = line(1, 5);
    S.gens[0] = std::vector<WRing::Elem>{W.mul(S.gens[0][0], W.integer(2)), W.zero(),
                                         W.mul(S.gens[0][2], W.integer(2)), W.zero()};
    CHECK(is_maximal_isotropic(S, K, psiH));
    CHECK(witt_cover(S).a == 1);
}

TEST_CASE("splitting of the MB kernel along the two divisor kernels") {
    MB mb(3);
    const WRing& W = *mb.W;
    DieudonneModule K = kernel_module(*mb.psi, mb.H, 1);
    DieudonneModule H1 = kernel_in(*mb.psi, mb.phi1, K), H2 = kernel_in(*mb.psi, mb.phi2, K);
    Splitting sp = splitting_sigma({H1, H2}, K);
    REQUIRE(sp.sigma.size() == 2);
    REQUIRE(sp.k_gens.size() == 2);
    for (size_t j = 0; j < sp.k_gens.size(); ++j) {
        WVec sum(4, W.zero());
        for (size_t r = 0; r < 4; ++r) sum[r] = W.add(sp.sigma[0][j][r], sp.sigma[1][j][r]);
        WVec diff(4, W.zero());
        for (size_t r = 0; r < 4; ++r) diff[r] = W.sub(sum[r], sp.k_gens[j][r]);
        CHECK(ambient_module(mb.W, 2, 1).span_with_relations().contains(W, sp.k_gens[j]));
        CHECK(Howell::build(W, K.relations(), 4).contains(W, diff));
        CHECK(H1.contains(sp.sigma[0][j]));
        CHECK(H2.contains(sp.sigma[1][j]));
    }
    // a single line does not span
    CHECK_THROWS_AS(splitting_sigma({H1}, K), std::domain_error);
    WittCover c = witt_cover(K);
    CHECK(c.a == 2);
}

TEST_CASE("degenerate polarizations and validation errors") {
    MB mb(4);
    const Order& O = mb.O;
    DieudonneModule K0 = kernel_module(*mb.psi, omat_identity(O, 2), 1);
    CHECK(K0.length() == 0);
    CHECK_THROWS_AS(kernel_module(*mb.psi, omat_scalar(O, 2, 3), 1), std::domain_error);
    DieudonneModule K3 = kernel_module(*mb.psi, omat_scalar(O, 2, 3), 2);
    CHECK(K3.length() == 4);
    // delta_1 alone is not stable under F in M(E^2[F^2])
    DieudonneModule S;
    S.W = mb.W;
    S.g = 2;
    S.n = 2;
    S.gens.push_back(unit(*mb.W, 4, 0));
    CHECK_THROWS_AS(is_maximal_isotropic(S, K3, mb.psi->extend(omat_scalar(O, 2, 3))), std::invalid_argument);
    CHECK_THROWS_AS(witt_cover(S), std::invalid_argument);
    CHECK_THROWS_AS(kernel_module(*mb.psi, mb.phi1, 1), std::invalid_argument);
    MB low(2);
    CHECK_THROWS_AS(kernel_module(*low.psi, low.H, 1), std::invalid_argument);
}

TEST_CASE("pairing is alternating and Psi extends matrix products") {
    MB mb(3);
    const WRing& W = *mb.W;
    const Order& O = mb.O;
    std::mt19937 rng(17);
    DieudonneModule K = kernel_module(*mb.psi, mb.H, 1);
    WMat psiH = mb.psi->extend(mb.H);
    for (int it = 0; it < 30; ++it) {
        WVec u(4, W.zero()), v(4, W.zero());
        for (const auto& g : K.gens) {
            auto a = random_elem(W, rng), b = random_elem(W, rng);
            for (size_t r = 0; r < 4; ++r) {
                u[r] = W.add(u[r], W.mul(a, g[r]));
                v[r] = W.add(v[r], W.mul(b, g[r]));
            }
        }
        CHECK(W.is_zero(dieudonne_pairing(W, psiH, u, u, 1)));
        CHECK(W.residue(W.add(dieudonne_pairing(W, psiH, u, v, 1), dieudonne_pairing(W, psiH, v, u, 1))).is_zero());
    }
    CHECK(wmat_equal(mb.psi->extend(omat_mul(O, mb.phi1, mb.phi2)),
                     wmat_mul(W, mb.psi->extend(mb.phi1), mb.psi->extend(mb.phi2))));
    CHECK(wmat_equal(mb.psi->extend(omat_identity(O, 2)), wmat_identity(W, 4)));
    OMat f(1, 1);
    f(0, 0) = O.frob();
    CHECK(wmat_equal(mb.psi->extend(f), mb.psi->psi_f()));
}

TEST_CASE("trivial isotropy and splitting cases") {
    MB mb(3);
    const Order& O = mb.O;
    DieudonneModule K0 = kernel_module(*mb.psi, omat_identity(O, 2), 1);
    DieudonneModule Z;
    Z.W = mb.W;
    Z.g = 2;
    Z.n = 1;
    CHECK(is_maximal_isotropic(Z, K0, mb.psi->extend(omat_identity(O, 2))));
    CHECK(witt_cover(Z).a == 0);
    DieudonneModule K = kernel_module(*mb.psi, mb.H, 1);
    Splitting sp = splitting_sigma({K}, K);
    for (size_t j = 0; j < sp.k_gens.size(); ++j) CHECK(sp.sigma[0][j] == sp.k_gens[j]);
}

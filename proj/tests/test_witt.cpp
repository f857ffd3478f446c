#include <random>
#include <string>

#include <gmpxx.h>

#include "doctest.h"
#include "supertheta/witt.hpp"

using namespace st;

namespace {

// W_n(F_p) is Z/p^n; the isomorphism sends (a_0, a_1, ...) to
// sum_i p^i T(a_i), where T is the Teichmueller lift.
int64_t teich(int64_t a, int64_t p, int64_t pn) {
    int64_t t = a % pn;
    for (int k = 0; k < 40; ++k) {
        int64_t s = 1;
        for (int64_t j = 0; j < p; ++j) s = s * t % pn;
        t = s;
    }
    return t;
}

int64_t to_int(const WittVec<Fq>& w, int64_t p, int64_t pn) {
    int64_t acc = 0, pi = 1;
    for (const auto& x : w) {
        acc = (acc + pi * teich(x.F->index_of(x.r), p, pn)) % pn;
        pi *= p;
    }
    return acc;
}

WittVec<Fq> from_digits(const FieldPtr& F, int64_t code, size_t n) {
    WittVec<Fq> w;
    for (size_t i = 0; i < n; ++i) {
        w.push_back(F->elem(F->from_index(static_cast<uint32_t>(code % F->p()))));
        code /= F->p();
    }
    return w;
}

// exp(-sum_{i} t^{p^i}/p^i) as a product of exponentials of monomials.
std::vector<mpq_class> ah_oracle(uint32_t p, size_t N) {
    std::vector<mpq_class> acc(N + 1, 0);
    acc[0] = 1;
    for (uint64_t pi = 1; pi <= N; pi *= p) {
        // exp(-t^pi / pi) = sum_k (-1)^k t^{k pi} / (pi^k k!)
        std::vector<mpq_class> f(N + 1, 0);
        mpq_class term = 1;
        for (size_t k = 0; k * pi <= N; ++k) {
            f[k * pi] = term;
            term = term * mpq_class(-1) / mpq_class(static_cast<long>(pi * (k + 1)));
        }
        std::vector<mpq_class> out(N + 1, 0);
        for (size_t a = 0; a <= N; ++a)
            for (size_t b = 0; a + b <= N; ++b) out[a + b] += acc[a] * f[b];
        acc = out;
    }
    return acc;
}

}  // namespace

TEST_CASE("Witt arithmetic over F_p matches Z/p^n") {
    for (auto [p, n] : {std::pair{3u, 3u}, {5u, 2u}, {3u, 4u}}) {
        auto F = Field::make(p, 1);
        int64_t pn = 1;
        for (uint32_t i = 0; i < n; ++i) pn *= p;
        std::mt19937_64 rng(p * 100 + n);
        for (int t = 0; t < 500; ++t) {
            int64_t a = rng() % pn, b = rng() % pn;
            auto wa = from_digits(F, a, n), wb = from_digits(F, b, n);
            int64_t ia = to_int(wa, p, pn), ib = to_int(wb, p, pn);
            CHECK(to_int(witt_add(wa, wb), p, pn) == (ia + ib) % pn);
            CHECK(to_int(witt_mul(wa, wb), p, pn) == ia * ib % pn);
            CHECK(to_int(witt_neg(wa), p, pn) == (pn - ia) % pn);
            CHECK(to_int(shift_t(wa), p, pn) == ia * p % pn);
        }
        for (int64_t m = -30; m <= 30; ++m)
            CHECK(to_int(witt_from_int(F->unit(), n, m), p, pn) == ((m % pn) + pn) % pn);
    }
}

TEST_CASE("ghost components of the integral polynomials") {
    auto T = WittPolyTable::get(3, 3);
    std::mt19937_64 rng(9);
    for (int t = 0; t < 20; ++t) {
        std::vector<mpz_class> v(6);
        for (auto& x : v) x = static_cast<long>(rng() % 21) - 10;
        std::vector<mpz_class> s(6, 0), m(6, 0);
        for (size_t i = 0; i < 3; ++i) {
            s[i] = T->sum_z(i).eval(v);
            m[i] = T->prod_z(i).eval(v);
        }
        for (size_t i = 0; i < 3; ++i) {
            ZPoly g = T->ghost(i);
            std::vector<mpz_class> y(6, 0);
            for (size_t j = 0; j < 3; ++j) y[j] = v[3 + j];
            CHECK(g.eval(s) == g.eval(v) + g.eval(y));
            CHECK(g.eval(m) == g.eval(v) * g.eval(y));
        }
    }
    CHECK_THROWS(WittPolyTable::get(2, 2));
}

TEST_CASE("FV = VF = p on W_n(F_9)") {
    auto F = Field::make(3, 2);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
        WittVec<Fq> a;
        for (int i = 0; i < 3; ++i) a.push_back(F->elem(F->random(rng)));
        auto three = witt_from_int(F->unit(), 3, 3);
        CHECK(frobenius(shift_t(a)) == witt_mul(a, three));
        CHECK(shift_t(frobenius(a)) == witt_mul(a, three));
        CHECK(witt_sub(witt_add(a, three), three) == a);
    }
}

TEST_CASE("Artin-Hasse coefficients") {
    for (uint32_t p : {3u, 5u, 7u}) {
        auto ex = ah_oracle(p, 60);
        auto s = AHSeries::compute(p, 60);
        for (size_t k = 0; k <= 60; ++k) {
            mpz_class P = p, inv, r;
            REQUIRE(!mpz_divisible_p(ex[k].get_den().get_mpz_t(), P.get_mpz_t()));
            mpz_invert(inv.get_mpz_t(), ex[k].get_den().get_mpz_t(), P.get_mpz_t());
            r = ex[k].get_num() * inv;
            mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), P.get_mpz_t());
            CHECK(s.c[k] == r.get_ui());
        }
    }
    auto s3 = AHSeries::compute(3, 3);
    CHECK(s3.c == std::vector<uint32_t>{1, 2, 2, 1});
}

TEST_CASE("pairing on W_{1,1}") {
    auto F = Field::make(3, 1);
    NilRing R(F, {"e1", "e2"}, {3, 3});
    Nil e = R.var(0) * R.var(1);
    Nil v = ah_pairing({R.var(0)}, {R.var(1)}, 1, 1);
    CHECK(v == R.one() - e + (e * e).scale(F->from_int(2)));
    CHECK_THROWS(ah_pairing({R.var(0)}, {R.var(1)}, 2, 1));
}

TEST_CASE("pairing is biadditive and F, V adjoint on universal points") {
    auto F = Field::make(3, 2);
    for (auto [m, n] : {std::pair{1u, 1u}, {1u, 2u}, {2u, 1u}, {2u, 2u}}) {
        CAPTURE(m);
        CAPTURE(n);
        uint32_t pm = m == 1 ? 3 : 9, pn = n == 1 ? 3 : 9;
        std::vector<std::string> names;
        std::vector<uint32_t> ex;
        for (uint32_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i)), ex.push_back(pm);
        for (uint32_t i = 0; i < n; ++i) names.push_back("z" + std::to_string(i)), ex.push_back(pm);
        for (uint32_t i = 0; i < m; ++i) names.push_back("y" + std::to_string(i)), ex.push_back(pn);
        NilRing R(F, names, ex);
        WittVec<Nil> x, z, y;
        for (uint32_t i = 0; i < n; ++i) x.push_back(R.var(i)), z.push_back(R.var(n + i));
        for (uint32_t i = 0; i < m; ++i) y.push_back(R.var(2 * n + i));
        Nil lhs = ah_pairing(witt_add(x, z), y, m, n);
        CHECK(lhs == ah_pairing(x, y, m, n) * ah_pairing(z, y, m, n));
        CHECK(ah_pairing(frobenius(x), y, m, n) == ah_pairing(x, shift_t(y), m, n));
        CHECK(ah_pairing(shift_t(x), y, m, n) == ah_pairing(x, frobenius(y), m, n));
    }
}

TEST_CASE("small W_2(F_3) examples") {
    auto F = Field::make(3, 1);
    WittVec<Fq> one = {F->unit(), F->zero()};
    CHECK(witt_add(witt_add(one, one), one) == WittVec<Fq>{F->zero(), F->unit()});
    WittVec<Fq> t = {F->zero(), F->unit()};
    CHECK(witt_mul(t, t) == WittVec<Fq>{F->zero(), F->zero()});
    CHECK(witt_mul(t, one) == t);
    CHECK(shift_t(WittVec<Fq>{F->unit(), F->unit()}) == t);
    auto F9 = Field::make(3, 2);
    Fq b = F9->elem(F9->generator());
    CHECK(frobenius(WittVec<Fq>{b, F9->zero()}) == WittVec<Fq>{b.pow(3), F9->zero()});
}

TEST_CASE("E_AH on nilpotent vectors") {
    auto F = Field::make(3, 2);
    NilRing R1(F, {"e"}, {2});
    CHECK(ah_exp_eval({R1.var(0), R1.zero()}) == R1.one() - R1.var(0));
    CHECK(ah_exp_eval({R1.zero()}) == R1.one());
    NilRing R(F, {"a", "b"}, {5, 4});
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        WittVec<Nil> a;
        for (int i = 0; i < 3; ++i) {
            Nil x = R.zero();
            for (uint32_t u = 0; u < 5; ++u)
                for (uint32_t v = 0; v < 4; ++v)
                    if (u + v > 0) x += R.monomial({u, v}, F->random(rng));
            a.push_back(x);
        }
        CHECK(ah_exp_eval(a) * ah_exp_eval(witt_neg(a)) == R.one());
    }
    CHECK_THROWS(ah_exp(R.one()));
}

TEST_CASE("Cartier duality matrix is invertible") {
    auto F = Field::make(3, 1);
    for (auto [m, n] : {std::pair{1u, 1u}, {1u, 2u}, {2u, 1u}, {2u, 2u}}) {
        Mat M = ah_duality_matrix(F, m, n);
        CHECK(rank(M) == M.rows);
    }
}

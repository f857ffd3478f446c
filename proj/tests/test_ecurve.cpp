#include <random>
#include <set>

#include "doctest.h"
#include "mb_fixture.hpp"
#include "supertheta/ecurve.hpp"

using namespace st;
using st::testing::MBFixture;

namespace {

const MBFixture& mb() {
    static MBFixture f;
    return f;
}

// Brute-force Weil pairing on E[2] for y^2 = (x - e1)(x - e2)(x - e3):
// e_2(P, Q) = -1 exactly when P, Q are distinct and nonzero.
Fq e2_oracle(const Field& F, const Pt<Fq>& P, const Pt<Fq>& Q) {
    if (P.inf || Q.inf || P == Q) return F.unit();
    return F.integer(-1);
}

}  // namespace

TEST_CASE("Laurent series arithmetic") {
    auto F = Field::make(3, 4);
    const Field* f = F.get();
    Laurent one = Laurent::constant(f, 1, 40);
    Laurent s = Laurent::monomial(f, 1, 1, 40);
    Laurent a = one + s;
    CHECK((a * a.inv()).equals(one));
    CHECK((a.inv()).coeff(5) == F->from_int(-1));
    Laurent sm2 = s.pow(-2);
    CHECK(sm2.valuation() == -2);
    CHECK_THROWS_AS(a.coeff(100), std::domain_error);

    std::mt19937_64 rng(3);
    std::vector<uint32_t> c(30);
    for (auto& x : c) x = F->random(rng);
    c[0] = 1;
    Laurent r = Laurent::from_coeffs(f, -3, c);
    Laurent cube = r * r * r;
    CHECK(cube.equals(r.frobenius_power(1)));
    CHECK(cube.qth_root(1).equals(r));
    CHECK_THROWS_AS(a.qth_root(1), std::domain_error);

    uint32_t k = F->random_nonzero(rng);
    Laurent rs = r.rescale_variable(k);
    CHECK(rs.coeff(-2) == F->mul(c[1], F->pow(k, -2)));
}

TEST_CASE("point counts and 2-torsion") {
    MBFixture f9(2);
    CHECK(f9.E->points().size() == 16);
    const auto& E = *mb().E;
    CHECK(E.points().size() == 6400);
    auto t2 = E.torsion(2);
    CHECK(t2.size() == 4);
    std::set<uint32_t> xs;
    for (const auto& P : t2)
        if (!P.inf) {
            CHECK(P.y.is_zero());
            xs.insert(P.x.r);
        }
    const Field& F = E.field();
    CHECK(xs == std::set<uint32_t>{0, F.from_int(1), F.from_int(-1)});
    CHECK(E.torsion(80).size() == 6400);
    for (size_t i = 0; i < E.points().size(); i += 97) CHECK(E.point_index(E.points()[i]) == i);
}

TEST_CASE("curve group law properties") {
    const auto& E = *mb().E;
    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t) {
        auto P = E.random_point(rng), Q = E.random_point(rng), S = E.random_point(rng);
        CHECK(E.add(E.add(P, Q), S) == E.add(P, E.add(Q, S)));
        CHECK(E.add(P, Q) == E.add(Q, P));
        CHECK(E.add(P, E.neg(P)).inf);
        CHECK(E.dbl(P) == E.add(P, P));
        CHECK(E.on_curve(E.add(P, Q)));
        CHECK(E.mul(P, E.order(P)).inf);
        CHECK(80 % E.order(P) == 0);
    }
    CHECK_THROWS_AS(Curve::make(mb().F, mb().F->zero(), mb().F->zero()), std::invalid_argument);
}

TEST_CASE("endomorphisms i and F") {
    const auto& R = *mb().R;
    const auto& E = R.curve();
    const auto& O = R.order();
    std::mt19937_64 rng(7);
    CHECK_NOTHROW(R.validate(rng, 40));
    for (int t = 0; t < 50; ++t) {
        auto P = E.random_point(rng);
        CHECK(R.eval(O.mul(O.w(), O.w()), P) == E.neg(P));
        auto ii = R.w_map().apply(R.w_map().apply(P));
        CHECK(ii == E.neg(P));
        auto FF = R.frob_map().apply(R.frob_map().apply(P));
        CHECK(E.add(FF, E.mul(P, 3)).inf);
        // (1 + i) F evaluated through coordinates agrees with composition.
        auto lhs = R.eval(O.parse("(1+i)F"), P);
        auto FP = R.frob_map().apply(P);
        CHECK(lhs == E.add(FP, R.w_map().apply(FP)));
    }
    CHECK_THROWS_AS(R.eval(O.parse("1/2"), E.random_point(rng)), std::domain_error);

    RatMap bad;  // identity, which does not square to -1
    EndoRing wrong(mb().E, O, bad, EndoRing::frobenius_map(E));
    CHECK_THROWS_AS(wrong.validate(rng, 5), std::invalid_argument);
}

TEST_CASE("formal points lie on the curve") {
    const auto& E = *mb().E;
    const Field& F = E.field();
    std::mt19937_64 rng(9);
    for (int t = 0; t < 5; ++t) {
        uint32_t c = F.random_nonzero(rng);
        auto h = E.formal_point(c, 48);
        CHECK(h.x.valuation() == -2);
        CHECK(h.y.valuation() == -3);
        Laurent lhs = h.y * h.y;
        Laurent rhs = h.x * h.x * h.x + h.x.scale(F.from_int(-1));
        CHECK(lhs.equals(rhs));
        // z = -x/y recovers c s.
        Laurent z = -(h.x / h.y);
        CHECK(z.valuation() == 1);
        CHECK(z.coeff(1) == c);
        for (int64_t e = 2; e < 30; ++e) CHECK(z.coeff(e) == 0);
    }
    // Additivity modulo degree 5 in characteristic 3 for a = -1, b = 0.
    uint32_t c1 = F.random_nonzero(rng), c2 = F.random_nonzero(rng);
    if (F.add(c1, c2) != 0) {
        auto sum = E.add(E.formal_point(c1, 48), E.formal_point(c2, 48));
        Laurent z = -(sum.x / sum.y);
        CHECK(z.coeff(1) == F.add(c1, c2));
        for (int64_t e = 2; e < 5; ++e) CHECK(z.coeff(e) == 0);
    }
}

TEST_CASE("Weil pairing") {
    const auto& E = *mb().E;
    const Field& F = E.field();
    Pt<Fq> T0(F.zero(), F.zero()), T1(F.unit(), F.zero());
    CHECK(weil_pairing(E, T0, T1, 2) == F.integer(-1));
    auto t2 = E.torsion(2);
    for (const auto& P : t2)
        for (const auto& Q : t2) CHECK(weil_pairing(E, P, Q, 2) == e2_oracle(F, P, Q));

    std::mt19937_64 rng(11);
    const int64_t N = 80;
    for (int t = 0; t < 15; ++t) {
        auto P = E.random_point(rng), Q = E.random_point(rng), S = E.random_point(rng);
        Fq e = weil_pairing(E, P, Q, N);
        CHECK(e.pow(N) == F.unit());
        CHECK(weil_pairing(E, P, P, N) == F.unit());
        CHECK(weil_pairing(E, Q, P, N) == e.inv());
        CHECK(weil_pairing(E, E.add(P, S), Q, N) == e * weil_pairing(E, S, Q, N));
        CHECK(weil_pairing(E, E.mul(P, 7), Q, N) == e.pow(7));
        // Galois equivariance for the F_3-rational Frobenius.
        const auto& R = *mb().R;
        CHECK(weil_pairing(E, R.frob_map().apply(P), R.frob_map().apply(Q), N) == e.pow(3));
        // i has degree 1.
        CHECK(weil_pairing(E, R.w_map().apply(P), R.w_map().apply(Q), N) == e);
    }
    CHECK_THROWS_AS(weil_pairing(E, E.random_point(rng), T0, 3), std::invalid_argument);
}

TEST_CASE("torsion field degree") {
    CHECK(torsion_field_degree(3, 8) == 4);
    CHECK(torsion_field_degree(3, 80) == 8);
    CHECK(torsion_field_degree(3, 4) == 2);
    MBFixture f9(2);
    CHECK_THROWS_AS(torsion_frame(*f9.R, f9.H, 4), std::runtime_error);
}

TEST_CASE("symplectic level-4 frame") {
    const auto& R = *mb().R;
    const auto& E = R.curve();
    const Field& F = E.field();
    auto fr = torsion_frame(R, mb().H, 4);
    CHECK(fr.x.size() == 2);
    CHECK(fr.zeta.pow(2) == F.integer(-1));
    for (size_t i = 0; i < 2; ++i) {
        CHECK(eg_mul(E, fr.xh[i], 2) == fr.x[i]);
        CHECK(eg_mul(E, fr.yh[i], 2) == fr.y[i]);
        CHECK(eg_is_zero(eg_mul(E, fr.x[i], 4)));
        for (size_t j = 0; j < 2; ++j) {
            CHECK(commutator_pairing(R, mb().H, fr.x[i], fr.y[j], 4) == (i == j ? fr.zeta : F.unit()));
            CHECK(commutator_pairing(R, mb().H, fr.x[i], fr.x[j], 4) == F.unit());
        }
    }
    // The frame generates E^2[4]: 256 distinct combinations.
    std::set<std::vector<size_t>> seen;
    for (int a = 0; a < 256; ++a) {
        EgPoint v = eg_zero(2);
        v = eg_add(E, v, eg_mul(E, fr.x[0], a & 3));
        v = eg_add(E, v, eg_mul(E, fr.x[1], (a >> 2) & 3));
        v = eg_add(E, v, eg_mul(E, fr.y[0], (a >> 4) & 3));
        v = eg_add(E, v, eg_mul(E, fr.y[1], (a >> 6) & 3));
        seen.insert({E.point_index(v[0]), E.point_index(v[1])});
    }
    CHECK(seen.size() == 256);
}

TEST_CASE("exponents scale the induced polarization") {
    const auto& fx = mb();
    CDDivisor D;
    D.phi = omat_identity(fx.O, 3);
    D.n = {1, 0, 2};
    OMat expect = omat_identity(fx.O, 3);
    expect(0, 0) = fx.O.integer(3);
    expect(2, 2) = fx.O.integer(9);
    CHECK(D.induced_polarization(fx.O) == expect);
    D.n = {1, 1, 1};
    CHECK(D.induced_polarization(fx.O) == omat_scalar(fx.O, 3, 3));
}

TEST_CASE("e_* on the MB divisors") {
    const auto& fx = mb();
    const auto& R = *fx.R;
    const auto& E = R.curve();
    const Field& F = E.field();
    auto fr = torsion_frame(R, fx.H, 4);
    auto basis = two_torsion_basis(E, fr);
    REQUIRE(basis.size() == 4);
    for (const auto& D : {fx.D1(), fx.D2()}) {
        CHECK(D.induced_polarization(fx.O) == fx.H);
        auto P = normalizing_point(R, D, basis);
        auto Dt = TranslatedDivisor::make(R, D, P);
        auto X = e_star_matrix(R, Dt, basis);
        for (size_t i = 0; i < 4; ++i)
            for (size_t j = 0; j < 4; ++j) CHECK(X[i][j] == ((i < 2 && j == i + 2) ? 1 : 0));
        // e_*(x + y) e_*(x) e_*(y) equals the level-2 commutator pairing.
        for (uint32_t a = 0; a < 16; ++a)
            for (uint32_t b = 0; b < 16; ++b) {
                auto x = two_torsion_point(E, basis, a), y = two_torsion_point(E, basis, b);
                int lhs = (e_star(R, Dt, eg_add(E, x, y)) + e_star(R, Dt, x) + e_star(R, Dt, y)) % 2;
                Fq rhs = commutator_pairing(R, fx.H, x, y, 2);
                CHECK(rhs == (lhs ? F.integer(-1) : F.unit()));
            }
        // The untranslated divisor is symmetric: multiplicity at x and -x agree.
        auto D0 = TranslatedDivisor::make(R, D, eg_zero(2));
        std::mt19937_64 rng(13);
        for (int t = 0; t < 50; ++t) {
            EgPoint x{E.random_point(rng), E.random_point(rng)};
            if (t % 2) x = eg_add(E, x, two_torsion_point(E, basis, static_cast<uint32_t>(t % 16)));
            CHECK(divisor_multiplicity_at(R, D0, x) == divisor_multiplicity_at(R, D0, eg_neg(E, x)));
        }
        CHECK(divisor_multiplicity_at(R, D0, eg_zero(2)) == 2);
    }
}

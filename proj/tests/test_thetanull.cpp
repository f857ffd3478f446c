#include <algorithm>
#include <optional>
#include <random>
#include <set>

#include "doctest.h"
#include "supertheta/thetanull.hpp"

using namespace st;

namespace {

struct F9 {
    FieldPtr F = Field::make(3, 2);
    Fq i = F->elem(F->sqrt(F->neg(1)));
};

ThetaNullpoint random_symmetric(const Field& F, size_t g, int64_t level, std::mt19937_64& rng) {
    ThetaNullpoint q;
    q.g = g;
    q.level = level;
    q.q.assign(zn_size(g, level), F.zero());
    for (size_t idx = 0; idx < q.q.size(); ++idx) {
        auto x = zn_vector(idx, g, level);
        for (auto& c : x) c = (level - c) % level;
        size_t j = zn_index(x, level);
        if (j < idx) q.q[idx] = q.q[j];
        else q.q[idx] = F.elem(F.random(rng));
    }
    return q;
}

// Mumford's characteristics for y^2 = prod_{k<=5} (x - a_k): eta_{2k-1} =
// (e_k ; e_1 + ... + e_{k-1}), eta_{2k} = (e_k ; e_1 + ... + e_k), eta_5 = (0 ; (1,1)).
std::pair<uint32_t, uint32_t> eta(int k) {
    if (k == 5) return {0u, 3u};
    int j = (k + 1) / 2;
    uint32_t a = 1u << (j - 1);
    int upto = (k % 2) ? j - 1 : j;
    uint32_t b = (1u << upto) - 1;
    return {a, b};
}

// Fourth powers of the even theta constants from Thomae's formula with
// U = {1, 3, 5}: theta[eta_S]^4 ~ prod_{i<j in S o U} (a_i - a_j) prod_{i<j not in S o U} (a_i - a_j).
std::vector<Fq> thomae_fourth_powers(const Field& F, const std::vector<int64_t>& roots) {
    std::vector<Fq> out(16, F.zero());
    std::vector<bool> seen(16, false);
    const uint32_t U = 0b10101;  // labels 1, 3, 5 as bits 0, 2, 4
    for (uint32_t S = 0; S < 32; ++S) {
        uint32_t SU = S ^ U;
        if (__builtin_popcount(SU) != 3) continue;
        uint32_t a = 0, b = 0;
        for (int k = 1; k <= 5; ++k)
            if (S >> (k - 1) & 1) {
                auto e = eta(k);
                a ^= e.first;
                b ^= e.second;
            }
        Fq prod = F.unit();
        for (int x = 0; x < 5; ++x)
            for (int y = x + 1; y < 5; ++y)
                if (((SU >> x) & 1) == ((SU >> y) & 1)) prod = prod * F.integer(roots[x] - roots[y]);
        size_t idx = ThetaConstants::index(a, b, 2);
        seen[idx] = true;
        out[idx] = prod;
    }
    REQUIRE(std::count(seen.begin(), seen.end(), true) == 10);
    return out;
}

// Riemann's quartic relations t_a t_b = s t_c t_d + s' t_e t_f among the even
// squares, in the index a_1 + 2 a_2 + 4 b_1 + 8 b_2.
const int kRelations[15][8] = {
    {0, 1, 1, 2, 3, 1, 8, 9},     {0, 2, 1, 1, 3, 1, 4, 6},    {0, 3, 1, 1, 2, 1, 12, 15},
    {0, 4, 1, 2, 6, 1, 8, 12},    {0, 6, 1, 2, 4, -1, 9, 15},  {0, 8, 1, 1, 9, 1, 4, 12},
    {0, 9, 1, 1, 8, -1, 6, 15},   {0, 12, 1, 3, 15, 1, 4, 8},  {0, 15, 1, 3, 12, -1, 6, 9},
    {1, 4, 1, 3, 6, 1, 9, 12},    {1, 6, 1, 3, 4, -1, 8, 15},  {1, 12, 1, 2, 15, 1, 4, 9},
    {1, 15, 1, 2, 12, -1, 6, 8},  {2, 8, 1, 3, 9, 1, 6, 12},   {2, 9, 1, 3, 8, -1, 4, 15},
};

// All Rosenhain triples of a set of six branch points (nullopt = infinity),
// as sorted reps.
std::set<std::vector<uint32_t>> rosenhain_orbit(const Field& F, const std::vector<std::optional<Fq>>& pts) {
    std::set<std::vector<uint32_t>> orbit;
    auto mobius = [&](const std::optional<Fq>& P0, const std::optional<Fq>& P1, const std::optional<Fq>& Pi,
                      const std::optional<Fq>& x) -> std::optional<Fq> {
        // (x - P0)(P1 - Pi) / ((x - Pi)(P1 - P0)), dropping factors at infinity.
        auto diff = [&](const std::optional<Fq>& u, const std::optional<Fq>& v) -> std::optional<Fq> {
            if (!u || !v) return std::nullopt;
            return *u - *v;
        };
        Fq num = F.unit(), den = F.unit();
        for (auto [d, top] : {std::pair{diff(x, P0), true}, {diff(P1, Pi), true}, {diff(x, Pi), false},
                              {diff(P1, P0), false}})
            if (d) (top ? num : den) = (top ? num : den) * *d;
        if (!x && Pi) return std::nullopt;
        if (den.is_zero()) return std::nullopt;
        return num / den;
    };
    for (size_t i = 0; i < 6; ++i)
        for (size_t j = 0; j < 6; ++j)
            for (size_t k = 0; k < 6; ++k) {
                if (i == j || j == k || i == k) continue;
                std::vector<uint32_t> rest;
                for (size_t m = 0; m < 6; ++m)
                    if (m != i && m != j && m != k) rest.push_back(mobius(pts[i], pts[j], pts[k], pts[m])->r);
                std::sort(rest.begin(), rest.end());
                orbit.insert(rest);
            }
    return orbit;
}

}  // namespace

TEST_CASE("Heisenberg group law and action") {
    F9 f;
    const Field& F = *f.F;
    std::mt19937_64 rng(1);
    for (int64_t N : {2, 4}) {
        HeisenbergGroup G(f.F.get(), 2, N, F.elem(F.root_of_unity(static_cast<uint32_t>(N))));
        auto rnd = [&] {
            return G.make(F.elem(F.random_nonzero(rng)), {static_cast<int64_t>(rng() % N), static_cast<int64_t>(rng() % N)},
                          {static_cast<int64_t>(rng() % N), static_cast<int64_t>(rng() % N)});
        };
        const size_t n = zn_size(2, N);
        CHECK(G.matrix(G.identity()) == Mat::identity(f.F.get(), n));
        for (int t = 0; t < 100; ++t) {
            auto a = rnd(), b = rnd(), c = rnd();
            CHECK(G.matrix(a) * G.matrix(b) == G.matrix(G.mul(a, b)));
            CHECK(G.equal(G.mul(G.mul(a, b), c), G.mul(a, G.mul(b, c))));
            CHECK(G.equal(G.mul(a, G.inv(a)), G.identity()));
            CHECK(G.equal(G.d_minus1(G.d_minus1(a)), a));
        }
        // [(1, x, 0), (1, 0, chi)] = chi(x).
        for (int t = 0; t < 20; ++t) {
            std::vector<int64_t> x{static_cast<int64_t>(rng() % N), static_cast<int64_t>(rng() % N)};
            std::vector<int64_t> chi{static_cast<int64_t>(rng() % N), static_cast<int64_t>(rng() % N)};
            auto gx = G.make(F.unit(), x, {0, 0}), gc = G.make(F.unit(), {0, 0}, chi);
            auto comm = G.mul(G.mul(gx, gc), G.mul(G.inv(gx), G.inv(gc)));
            CHECK(G.equal(comm, G.make(G.character(chi, x), {0, 0}, {0, 0})));
        }
        CHECK_THROWS_AS(G.make(F.unit(), {0}, {0, 0}), std::invalid_argument);
    }
}

TEST_CASE("structural maps") {
    F9 f;
    const Field& F = *f.F;
    Fq z4 = F.elem(F.root_of_unity(4));
    HeisenbergGroup G2(f.F.get(), 2, 2, z4 * z4), G4(f.F.get(), 2, 4, z4);
    std::mt19937_64 rng(2);
    CHECK(G4.equal(structural_E2(G2, G4, G2.identity()), G4.identity()));
    for (int t = 0; t < 50; ++t) {
        auto a = G2.make(F.elem(F.random_nonzero(rng)), {static_cast<int64_t>(rng() % 2), static_cast<int64_t>(rng() % 2)},
                         {static_cast<int64_t>(rng() % 2), static_cast<int64_t>(rng() % 2)});
        auto h = structural_H2(G4, G2, structural_E2(G2, G4, a));
        auto s = a.s.pow(4);
        CHECK(G2.equal(h, G2.make(s, {2 * a.x[0], 2 * a.x[1]}, {2 * a.chi[0], 2 * a.chi[1]})));
        // E_2 is a homomorphism.
        auto b = G2.make(F.unit(), {1, 0}, {0, 1});
        CHECK(G4.equal(structural_E2(G2, G4, G2.mul(a, b)),
                       G4.mul(structural_E2(G2, G4, a), structural_E2(G2, G4, b))));
    }
    CHECK_THROWS_AS(structural_E2(G2, HeisenbergGroup(f.F.get(), 1, 4, z4), G2.identity()), std::invalid_argument);
}

TEST_CASE("fourier_theta examples and parity") {
    F9 f;
    const Field& F = *f.F;
    ThetaNullpoint q;
    q.g = 2;
    q.level = 4;
    q.q.assign(16, F.zero());
    q.q[0] = F.unit();
    auto th = fourier_theta(q, f.i);
    for (uint32_t a = 0; a < 4; ++a)
        for (uint32_t b = 0; b < 4; ++b) CHECK(th.at(a, b) == (a == 0 ? F.unit() : F.zero()));

    // g = 1 with q = (q0, q1, q2, q1).
    std::mt19937_64 rng(3);
    Fq q0 = F.elem(F.random(rng)), q1 = F.elem(F.random(rng)), q2 = F.elem(F.random(rng));
    ThetaNullpoint r{1, 4, {q0, q1, q2, q1}};
    auto t1 = fourier_theta(r, f.i);
    CHECK(t1.at(0, 0) == q0 + q2);
    CHECK(t1.at(0, 1) == q0 - q2);
    CHECK(t1.at(1, 0) == q1 + q1);
    CHECK(t1.at(1, 1).is_zero());

    for (int t = 0; t < 50; ++t) {
        auto s = random_symmetric(F, 2, 4, rng);
        REQUIRE(s.is_symmetric());
        auto a = fourier_theta(s, f.i), b = fourier_theta(s, -f.i);
        CHECK(a.v == b.v);
        for (uint32_t x = 0; x < 4; ++x)
            for (uint32_t y = 0; y < 4; ++y)
                if (ThetaConstants::parity(x, y)) CHECK(a.at(x, y).is_zero());
        // The inverse transform recovers q.
        CHECK(inverse_fourier_theta(a, f.i).q == s.q);
    }
    CHECK_THROWS_AS(fourier_theta(r, F.unit()), std::invalid_argument);
}

TEST_CASE("squares_from_level2") {
    F9 f;
    const Field& F = *f.F;
    ThetaNullpoint z{1, 2, {F.zero(), F.zero()}};
    for (const auto& x : squares_from_level2(z).v) CHECK(x.is_zero());
    ThetaNullpoint one{1, 2, {F.unit(), F.unit()}};
    auto s = squares_from_level2(one);
    CHECK(s.at(0, 0) == F.integer(2));
    CHECK(s.at(0, 1).is_zero());
    CHECK(s.at(1, 0) == F.integer(2));
    CHECK(s.at(1, 1).is_zero());

    // Double-sum brute force over explicit coordinate vectors.
    std::mt19937_64 rng(4);
    for (size_t g = 1; g <= 2; ++g)
        for (int t = 0; t < 20; ++t) {
            auto q = random_symmetric(F, g, 2, rng);
            auto th = squares_from_level2(q);
            const uint32_t n = 1u << g;
            for (uint32_t a = 0; a < n; ++a)
                for (uint32_t b = 0; b < n; ++b) {
                    Fq acc = F.zero();
                    for (size_t xi = 0; xi < n; ++xi) {
                        auto x = zn_vector(xi, g, 2), av = zn_vector(a, g, 2), bv = zn_vector(b, g, 2);
                        std::vector<int64_t> xa(g);
                        int64_t e = 0;
                        for (size_t k = 0; k < g; ++k) {
                            xa[k] = x[k] + av[k];
                            e += x[k] * bv[k];
                        }
                        Fq term = q.q[xi] * q.q[zn_index(xa, 2)];
                        acc = acc + (e % 2 ? -term : term);
                    }
                    CHECK(th.at(a, b) == acc);
                }
        }
}

TEST_CASE("level 2 squares vanish on odd characteristics") {
    F9 f;
    const Field& F = *f.F;
    std::mt19937_64 rng(5);
    auto q2 = random_symmetric(F, 2, 2, rng);
    auto s = squares_from_level2(q2);
    for (uint32_t a = 0; a < 4; ++a)
        for (uint32_t b = 0; b < 4; ++b)
            if (ThetaConstants::parity(a, b)) CHECK(s.at(a, b).is_zero());
}

TEST_CASE("duplication image") {
    F9 f;
    const Field& F = *f.F;
    auto v1 = duplication_image(F, 1);
    CHECK(v1 == std::vector<Fq>{F.unit(), F.zero(), F.unit(), F.zero()});
    for (size_t g = 1; g <= 2; ++g) {
        HeisenbergGroup G4(f.F.get(), g, 4, f.i);
        auto v = duplication_image(F, g);
        CHECK(std::count(v.begin(), v.end(), F.unit()) == static_cast<long>(zn_size(g, 2)));
        auto ops = duplication_level_group(G4);
        for (const auto& op : ops) CHECK(G4.act(op, v) == v);
        // Uniqueness: the common fixed space of the level group is a line.
        const size_t n = zn_size(g, 4);
        Mat stack(f.F.get(), n * ops.size(), n);
        for (size_t k = 0; k < ops.size(); ++k) {
            Mat M = G4.matrix(ops[k]) - Mat::identity(f.F.get(), n);
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j) stack(k * n + i, j) = M(i, j);
        }
        Mat K = nullspace(stack);
        REQUIRE(K.cols == 1);
        Mat vv(f.F.get(), n, 1);
        for (size_t i = 0; i < n; ++i) vv(i, 0) = v[i].r;
        CHECK(column_intersection(K, vv).cols == 1);
    }
}

TEST_CASE("vanishing profile") {
    F9 f;
    const Field& F = *f.F;
    std::mt19937_64 rng(6);
    // A product of two g = 1 nullpoints: theta_{11,11} = theta_{1,1} theta_{1,1} = 0 is even.
    auto qa = random_symmetric(F, 1, 4, rng), qb = random_symmetric(F, 1, 4, rng);
    ThetaNullpoint q{2, 4, std::vector<Fq>(16, F.zero())};
    for (int64_t x = 0; x < 4; ++x)
        for (int64_t y = 0; y < 4; ++y) q.q[zn_index({x, y}, 4)] = qa.q[x] * qb.q[y];
    auto p = vanishing_profile(fourier_theta(q, f.i));
    CHECK(p.odd.size() == 6);
    CHECK(p.odd_total == 6);
    CHECK(std::find(p.even.begin(), p.even.end(), std::make_pair(3u, 3u)) != p.even.end());
}

TEST_CASE("Rosenhain invariants from a Thomae oracle") {
    // y^2 = x (x - 1)(x - 2)(x - 3)(x - 5) over F_101; square roots of the
    // fourth powers live in F_{101^2}.
    auto F = Field::make(101, 2);
    auto t4 = thomae_fourth_powers(*F, {0, 1, 2, 3, 5});
    std::vector<Fq> root(16, F->zero());
    std::vector<size_t> even;
    for (size_t i = 0; i < 16; ++i) {
        if (t4[i].is_zero()) continue;
        root[i] = F->elem(F->sqrt(t4[i].r));
        even.push_back(i);
    }
    REQUIRE(even.size() == 10);
    std::vector<std::optional<Fq>> pts{F->integer(0), F->integer(1), F->integer(2), F->integer(3), F->integer(5),
                                       std::nullopt};
    auto orbit = rosenhain_orbit(*F, pts);
    CHECK(orbit.size() == 120);
    size_t valid = 0;
    // The Riemann relations single out the sign choices of the square roots.
    for (uint32_t mask = 0; mask < 512; ++mask) {
        ThetaConstants sq{2, true, std::vector<Fq>(16, F->zero())};
        for (size_t k = 0; k < 10; ++k) sq.v[even[k]] = (k > 0 && (mask >> (k - 1) & 1)) ? -root[even[k]] : root[even[k]];
        bool ok = true;
        for (const auto& r : kRelations) {
            Fq lhs = sq.v[r[0]] * sq.v[r[1]];
            Fq rhs = F->integer(r[2]) * sq.v[r[3]] * sq.v[r[4]] + F->integer(r[5]) * sq.v[r[6]] * sq.v[r[7]];
            ok = ok && lhs == rhs;
        }
        if (!ok) continue;
        ++valid;
        auto l = rosenhain_g2(sq);
        std::vector<uint32_t> got{l[0].r, l[1].r, l[2].r};
        std::sort(got.begin(), got.end());
        CHECK(orbit.count(got) == 1);
        CHECK(l[0] == F->integer(2));
        CHECK(l[1] == F->integer(3));
        CHECK(l[2] == F->integer(5));
    }
    CHECK(valid > 0);

    ThetaConstants bad{2, true, std::vector<Fq>(16, F->unit())};
    bad.v[0] = F->zero();
    CHECK_THROWS_AS(rosenhain_g2(bad), std::runtime_error);
}

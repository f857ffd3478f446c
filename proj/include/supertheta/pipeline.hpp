#pragma once

#include <array>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "supertheta/config.hpp"
#include "supertheta/dieudonne.hpp"
#include "supertheta/ecurve.hpp"
#include "supertheta/hyperelliptic.hpp"
#include "supertheta/sections.hpp"
#include "supertheta/thetanull.hpp"

namespace st {

// A failure after validation.  The message is prefixed with the stage that
// raised it; partial holds whatever intermediates were computed so far.  The
// CLI maps it to exit code 3.
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& what, nlohmann::json partial = {})
        : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)), partial_(std::move(partial)) {}
    const std::string& stage() const { return stage_; }
    const nlohmann::json& partial() const { return partial_; }

private:
    std::string stage_;
    nlohmann::json partial_;
};

// The validated fixed data: field, curve with its order, polarization,
// divisors and the Dieudonne side.
struct Problem {
    FieldPtr F;
    CurvePtr E;
    std::unique_ptr<Order> O;
    std::unique_ptr<EndoRing> R;
    OMat H;
    std::vector<CDDivisor> divisors;
    size_t reference = 0;

    WRingPtr W;
    std::unique_ptr<PsiMap> psi;
    WMat psiH;
    DieudonneModule K;                   // M(ker eta)
    DieudonneModule S;                   // M(H)
    std::vector<DieudonneModule> subs;   // kernels of the divisors inside K
    std::vector<uint32_t> direction;     // formal direction used by ev0

    size_t g() const { return H.rows; }
    // h^0 of the line bundle of the divisors: p^{length(K) / 2}.
    size_t h0() const;
};

// Builds and validates everything the config describes; throws
// ValidationError on bad input (including a non-isotropic M(H)) and
// PipelineError for inputs outside the supported range (n > 1 or a
// non-cyclic M(H)).  No section space is touched.
Problem build_problem(const ProblemConfig& cfg);

// The components of h in M(H) along the divisor kernels, as formal
// parameters per factor: dirs[i][m] is the delta_m residue of the part of h
// in M(H_i).
std::vector<std::vector<uint32_t>> split_directions(const Problem& P);

// Everything up to the invariant section rho_H on L(D).
struct Prepared {
    const Problem* P = nullptr;
    TorsionFrame frame;
    EgPoint normalizing;
    TranslatedDivisor D;                           // D_r + normalizing point
    SectionSpace LD;
    std::vector<std::optional<RelatingFunction>> relating;  // per divisor
    SplitHData split;
    std::vector<size_t> split_divisors;            // divisor index of each entry of split
    SectionComodule comodule;
    std::vector<uint32_t> rho_H;
};

Prepared prepare(const Problem& P, std::mt19937_64& rng, nlohmann::json* log = nullptr);

// theta_{a,b} = ev0(U_{v_b} U_{v_a} (rho_2 . [2]^* rho_H)) for a, b in {0,1}^g.
class ThetaKernel {
public:
    ThetaKernel(const Prepared& prep, size_t series_length);

    size_t g() const { return g_; }
    size_t size() const { return size_t(1) << (2 * g_); }
    // Entry with ThetaConstants index idx = a + 2^g b.
    Fq eval(size_t idx) const;
    const Fq& zeta() const { return zeta_; }

private:
    const EndoRing* R_;
    const TranslatedDivisor* D_;
    size_t g_, len_;
    std::vector<uint32_t> dir_;
    Fq zeta_;
    EgFn seed_;
    std::vector<LevelElement> Ux_, Uy_;
};

// Serial reference and the OpenMP version; both return the table in index
// order and agree exactly.
ThetaConstants theta_table_serial(const ThetaKernel& K);
ThetaConstants theta_table_parallel(const ThetaKernel& K);

// The level-2 route: the level-2 theta section s_2 on L(2D) and q_2(x) =
// ev0(U_{x} s_2) for x in {0,1}^g.
struct SquaresRoute {
    size_t invariant_dim = 0;
    std::vector<uint32_t> s2;
    ThetaNullpoint q2;
};
SquaresRoute squares_route(const Prepared& prep, std::mt19937_64& rng, size_t series_length, bool parallel = true);

struct RosenhainResult {
    std::array<Fq, 3> lambda;
    HyperellipticCurve curve;
    std::optional<LPolynomial> lpoly;
    std::optional<bool> supersingular;
    std::string note;  // why the point count was skipped, if it was
};

struct RunOptions {
    std::optional<RunMode> mode;  // overrides the config
    bool parallel = true;
    bool dump_intermediates = false;
};

struct RunResult {
    FieldPtr field;  // owns the field the elements below point into
    RunMode mode = RunMode::Full;
    size_t g = 0;
    ThetaNullpoint q;            // level 4 (full) or 2 (squares), normalized
    ThetaConstants theta;        // theta (full) or theta^2 (squares), normalized
    VanishingProfile profile;
    uint32_t theta_field_degree = 0;  // smallest d with the normalized table in F_{p^d}
    std::optional<RosenhainResult> rosenhain;
    std::string rosenhain_note;
    nlohmann::json diagnostics;
    nlohmann::json intermediates;
    std::vector<std::pair<std::string, double>> timings;
};

RunResult run_pipeline(const ProblemConfig& cfg, const RunOptions& opt = {});

// Output document.  Field elements are written as their power-basis
// coordinate lists, constant term first.  Everything except "timings" is a
// deterministic function of the config.
nlohmann::json result_to_json(const ProblemConfig& cfg, const RunResult& r, bool with_timings = true);

// "a1a2,b1b2" style key of a characteristic.
std::string characteristic_key(uint32_t a, uint32_t b, size_t g);

}  // namespace st

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "supertheta/dieudonne.hpp"
#include "supertheta/ffield.hpp"
#include "supertheta/order.hpp"

namespace st {

// Raised for malformed or inconsistent problem descriptions.  The CLI maps it
// to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DivisorSpec {
    std::string name;
    std::vector<std::vector<std::string>> phi;  // g x g order expressions
    std::vector<uint32_t> n;                    // exponents n_m
};

// Rational map (x, y) -> (xn/xd, y yn/yd) with field-expression coefficients,
// constant term first.
struct RatMapSpec {
    std::vector<std::string> xn{"0", "1"}, xd{"1"}, yn{"1"}, yd{"1"};
};

enum class RunMode { Full, Squares };

std::string to_string(RunMode m);
RunMode parse_mode(const std::string& s);

struct ProblemConfig {
    std::string name;
    uint32_t p = 3, k = 1;
    std::vector<uint32_t> modulus;  // optional, constant term first
    std::string curve_a = "0", curve_b = "0";
    CMData cm;
    RatMapSpec w_map;
    std::vector<std::vector<std::string>> psi_w;  // 2 x 2, Witt-ring expressions
    std::vector<std::vector<std::string>> H;
    uint32_t n = 1;
    std::vector<DivisorSpec> divisors;
    // Generators of M(H) in the ambient coordinates (delta_1, F delta_1, ...,
    // delta_g, F delta_g); entries are Witt-ring expressions.
    std::vector<std::vector<std::string>> mh;
    // Index of the divisor D_r that is normalized and used for the sections;
    // defaults to the last one.
    size_t reference = 0;

    RunMode mode = RunMode::Full;
    uint64_t seed = 1;
    size_t series_length = 64;
    std::vector<std::string> eval_direction;  // formal direction of ev0, one entry per factor
    int threads = 0;                          // 0: OpenMP default

    nlohmann::json source;  // the parsed input, echoed into the output

    size_t g() const { return H.size(); }
};

// Reads and checks the shape of a problem description; throws ValidationError.
ProblemConfig parse_config(const nlohmann::json& j);
ProblemConfig load_config(const std::string& path);

// Field expressions: +, -, *, / and ^ (integer exponents) over integers, g
// (the field's fixed generator), sqrt(expr) (the root chosen by Field::sqrt)
// and parentheses.
Fq parse_field_expr(const Field& F, const std::string& s);

// Witt-ring expressions: sums of terms c, c*teich(x) or teich(x) with c an
// integer and x a field expression.
WRing::Elem parse_witt_expr(const WRing& W, const std::string& s);

}  // namespace st

#include "supertheta/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace st {

namespace {

// Replaces the Unicode minus sign and the middle dot by ASCII and drops blanks,
// except a blank between two digits, which is kept so that "1 2" is rejected.
std::string normalize_ascii(const std::string& s) {
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (c == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x88 &&
            static_cast<unsigned char>(s[i + 2]) == 0x92) {
            out.push_back('-');
            i += 2;
        } else if (c == 0xC2 && i + 1 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0xB7) {
            out.push_back('*');
            i += 1;
        } else if (!std::isspace(c)) {
            out.push_back(static_cast<char>(c));
        } else {
            size_t j = i;
            while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
            if (!out.empty() && std::isdigit(static_cast<unsigned char>(out.back())) && j < s.size() &&
                std::isdigit(static_cast<unsigned char>(s[j])))
                out.push_back(' ');
            i = j - 1;
        }
    }
    return out;
}

class FieldExprParser {
public:
    FieldExprParser(const Field& F, const std::string& src) : F_(F), s_(normalize_ascii(src)), orig_(src) {}

    Fq parse() {
        if (s_.empty()) fail("empty expression");
        Fq v = expr();
        if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
        return v;
    }

private:
    const Field& F_;
    std::string s_, orig_;
    size_t i_ = 0;

    [[noreturn]] void fail(const std::string& why) const {
        throw ValidationError("field expression \"" + orig_ + "\": " + why);
    }
    bool eat(char c) {
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }
    int64_t integer() {
        size_t start = i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        if (start == i_) fail("expected an integer");
        if (i_ - start > 17) fail("integer too large");
        return std::stoll(s_.substr(start, i_ - start));
    }

    Fq expr() {
        bool neg = eat('-');
        if (!neg) eat('+');
        Fq acc = term();
        if (neg) acc = -acc;
        while (true) {
            if (eat('+')) acc = acc + term();
            else if (eat('-')) acc = acc - term();
            else return acc;
        }
    }

    Fq term() {
        Fq acc = power();
        while (i_ < s_.size()) {
            if (eat('*')) acc = acc * power();
            else if (eat('/')) {
                Fq d = power();
                if (d.is_zero()) fail("division by zero");
                acc = acc / d;
            } else if (s_[i_] == '(' || s_[i_] == 'g' || s_[i_] == 's') {
                acc = acc * power();  // juxtaposition
            } else {
                break;
            }
        }
        return acc;
    }

    Fq power() {
        Fq b = atom();
        if (eat('^')) {
            bool neg = eat('-');
            int64_t e = integer();
            if (b.is_zero() && (neg || e == 0)) fail("0 raised to a non-positive power");
            b = b.pow(neg ? -e : e);
        }
        return b;
    }

    Fq atom() {
        if (i_ >= s_.size()) fail("unexpected end");
        if (eat('(')) {
            Fq v = expr();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        if (s_.compare(i_, 5, "sqrt(") == 0) {
            i_ += 5;
            Fq v = expr();
            if (!eat(')')) fail("missing ')'");
            if (!F_.is_square(v.r)) fail("sqrt of a non-square");
            return F_.elem(F_.sqrt(v.r));
        }
        if (eat('g')) return F_.elem(F_.generator());
        if (std::isdigit(static_cast<unsigned char>(s_[i_]))) return F_.integer(integer());
        fail("unexpected '" + std::string(1, s_[i_]) + "'");
    }
};

template <class T>
T get_or(const nlohmann::json& j, const char* key, T def) {
    return j.contains(key) ? j.at(key).get<T>() : def;
}

std::vector<std::vector<std::string>> string_matrix(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array()) throw ValidationError(what + ": expected an array of rows");
    std::vector<std::vector<std::string>> out;
    for (const auto& row : j) {
        if (!row.is_array()) throw ValidationError(what + ": expected an array of rows");
        std::vector<std::string> r;
        for (const auto& e : row) {
            if (e.is_string()) r.push_back(e.get<std::string>());
            else if (e.is_number_integer()) r.push_back(std::to_string(e.get<int64_t>()));
            else throw ValidationError(what + ": entries must be strings or integers");
        }
        out.push_back(std::move(r));
    }
    return out;
}

void require_shape(const std::vector<std::vector<std::string>>& m, size_t rows, size_t cols, const std::string& what) {
    bool ok = m.size() == rows;
    for (const auto& r : m) ok = ok && r.size() == cols;
    if (!ok) {
        std::ostringstream os;
        os << what << ": expected a " << rows << " x " << cols << " matrix";
        throw ValidationError(os.str());
    }
}

std::vector<std::string> string_list(const nlohmann::json& j, const std::string& what) {
    auto m = string_matrix(nlohmann::json::array({j}), what);
    return m.front();
}

}  // namespace

std::string to_string(RunMode m) { return m == RunMode::Full ? "full" : "squares"; }

RunMode parse_mode(const std::string& s) {
    if (s == "full") return RunMode::Full;
    if (s == "squares") return RunMode::Squares;
    throw ValidationError("mode must be \"full\" or \"squares\", got \"" + s + "\"");
}

Fq parse_field_expr(const Field& F, const std::string& s) { return FieldExprParser(F, s).parse(); }

WRing::Elem parse_witt_expr(const WRing& W, const std::string& src) {
    const std::string s = normalize_ascii(src);
    if (s.empty()) throw ValidationError("Witt expression is empty");
    WRing::Elem acc = W.zero();
    size_t i = 0;
    while (i < s.size()) {
        int sign = 1;
        if (s[i] == '+' || s[i] == '-') {
            sign = s[i] == '-' ? -1 : 1;
            ++i;
        } else if (i != 0) {
            throw ValidationError("Witt expression \"" + src + "\": expected '+' or '-'");
        }
        int64_t c = 1;
        bool have_c = false;
        size_t start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i > start) {
            c = std::stoll(s.substr(start, i - start));
            have_c = true;
            if (i < s.size() && s[i] == '*') ++i;
        }
        WRing::Elem t = W.integer(1);
        if (s.compare(i, 6, "teich(") == 0) {
            i += 6;
            int depth = 1;
            size_t b = i;
            while (i < s.size() && depth > 0) {
                if (s[i] == '(') ++depth;
                if (s[i] == ')') --depth;
                ++i;
            }
            if (depth != 0) throw ValidationError("Witt expression \"" + src + "\": missing ')'");
            t = W.teichmuller(parse_field_expr(W.field(), s.substr(b, i - 1 - b)));
        } else if (!have_c) {
            throw ValidationError("Witt expression \"" + src + "\": expected an integer or teich(...)");
        }
        acc = W.add(acc, W.mul_int(t, sign * c));
    }
    return acc;
}

ProblemConfig parse_config(const nlohmann::json& j) {
    ProblemConfig c;
    try {
        c.source = j;
        c.name = get_or<std::string>(j, "name", "unnamed");
        const auto& fj = j.at("field");
        c.p = fj.at("p").get<uint32_t>();
        c.k = fj.at("k").get<uint32_t>();
        if (fj.contains("modulus")) c.modulus = fj.at("modulus").get<std::vector<uint32_t>>();
        const auto& cj = j.at("curve");
        c.curve_a = cj.at("a").get<std::string>();
        c.curve_b = cj.at("b").get<std::string>();
        const auto& oj = j.at("order");
        c.cm.name = get_or<std::string>(oj, "symbol", "i");
        c.cm.t = oj.at("t").get<int64_t>();
        c.cm.n = oj.at("n").get<int64_t>();
        c.cm.p = c.p;
        const auto& ej = j.at("endomorphism");
        c.w_map.xn = string_list(ej.at("xn"), "endomorphism.xn");
        c.w_map.xd = string_list(ej.at("xd"), "endomorphism.xd");
        c.w_map.yn = string_list(ej.at("yn"), "endomorphism.yn");
        c.w_map.yd = string_list(ej.at("yd"), "endomorphism.yd");
        c.psi_w = string_matrix(j.at("psi_w"), "psi_w");
        c.H = string_matrix(j.at("H"), "H");
        c.n = j.at("n").get<uint32_t>();
        for (const auto& dj : j.at("divisors")) {
            DivisorSpec d;
            d.name = dj.at("name").get<std::string>();
            d.phi = string_matrix(dj.at("phi"), "divisor " + d.name);
            d.n = dj.at("n").get<std::vector<uint32_t>>();
            c.divisors.push_back(std::move(d));
        }
        c.mh = string_matrix(j.at("mh"), "mh");
        c.reference = c.divisors.empty() ? 0 : c.divisors.size() - 1;
        if (j.contains("reference_divisor")) {
            std::string ref = j.at("reference_divisor").get<std::string>();
            bool found = false;
            for (size_t i = 0; i < c.divisors.size(); ++i)
                if (c.divisors[i].name == ref) {
                    c.reference = i;
                    found = true;
                }
            if (!found) throw ValidationError("reference_divisor \"" + ref + "\" is not a configured divisor");
        }
        if (j.contains("options")) {
            const auto& opt = j.at("options");
            c.mode = parse_mode(get_or<std::string>(opt, "mode", "full"));
            c.seed = get_or<uint64_t>(opt, "seed", 1);
            c.series_length = get_or<size_t>(opt, "series_length", 64);
            c.threads = get_or<int>(opt, "threads", 0);
            if (opt.contains("eval_direction")) c.eval_direction = string_list(opt.at("eval_direction"), "eval_direction");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }

    const size_t g = c.H.size();
    if (g == 0) throw ValidationError("H must be a nonempty square matrix");
    require_shape(c.H, g, g, "H");
    require_shape(c.psi_w, 2, 2, "psi_w");
    if (c.p < 3) throw ValidationError("field.p must be an odd prime");
    if (c.n == 0) throw ValidationError("n must be positive");
    if (c.divisors.empty()) throw ValidationError("at least one divisor is required");
    for (const auto& d : c.divisors) {
        require_shape(d.phi, g, g, "divisor " + d.name);
        if (d.n.size() != g) throw ValidationError("divisor " + d.name + ": n must have one exponent per row");
    }
    if (c.mh.empty()) throw ValidationError("mh needs at least one generator");
    for (const auto& v : c.mh)
        if (v.size() != 2 * g) throw ValidationError("mh: generators have 2g coordinates (delta_j, F delta_j)");
    if (!c.eval_direction.empty() && c.eval_direction.size() != g)
        throw ValidationError("eval_direction must have g entries");
    if (c.series_length < 8) throw ValidationError("series_length must be at least 8");
    return c;
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace st

#include "supertheta/order.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace st {

namespace {

struct KElem {
    mpq_class c0, c1;
};

KElem kmul(const CMData& cm, const KElem& x, const KElem& y) {
    // w^2 = -t w - n
    mpq_class hh = x.c1 * y.c1;
    return {x.c0 * y.c0 - cm.n * hh, x.c0 * y.c1 + x.c1 * y.c0 - cm.t * hh};
}
KElem kconj(const CMData& cm, const KElem& x) { return {x.c0 - cm.t * x.c1, -x.c1}; }
KElem kadd(const KElem& x, const KElem& y) { return {x.c0 + y.c0, x.c1 + y.c1}; }
KElem ksub(const KElem& x, const KElem& y) { return {x.c0 - y.c0, x.c1 - y.c1}; }

mpz_class lcm_den(const mpz_class& acc, const mpq_class& q) {
    mpz_class r;
    mpz_lcm(r.get_mpz_t(), acc.get_mpz_t(), q.get_den_mpz_t());
    return r;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

class Parser {
public:
    Parser(const Order& O, std::string s) : O_(O), s_(std::move(s)) {}

    OElem run() {
        OElem r = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return r;
    }

private:
    const Order& O_;
    std::string s_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("order expression '" + s_ + "': " + what + " at offset " + std::to_string(pos_));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }
    bool starts_primary() {
        skip();
        if (pos_ >= s_.size()) return false;
        char c = s_[pos_];
        return std::isdigit(static_cast<unsigned char>(c)) || std::isalpha(static_cast<unsigned char>(c)) || c == '(';
    }

    OElem expr() {
        OElem acc = term();
        for (;;) {
            if (peek('+')) {
                ++pos_;
                acc = O_.add(acc, term());
            } else if (peek('-')) {
                ++pos_;
                acc = O_.sub(acc, term());
            } else {
                return acc;
            }
        }
    }

    OElem term() {
        OElem acc = unary();
        for (;;) {
            if (peek('*')) {
                ++pos_;
                acc = O_.mul(acc, unary());
            } else if (peek('/')) {
                ++pos_;
                skip();
                mpz_class d = integer_literal();
                if (d == 0) fail("division by zero");
                acc = O_.scale(acc, mpq_class(1, d));
            } else if (starts_primary()) {
                acc = O_.mul(acc, unary());
            } else {
                return acc;
            }
        }
    }

    OElem unary() {
        if (peek('-')) {
            ++pos_;
            return O_.neg(unary());
        }
        if (peek('+')) {
            ++pos_;
            return unary();
        }
        return primary();
    }

    mpz_class integer_literal() {
        size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("expected an integer");
        return mpz_class(s_.substr(start, pos_ - start));
    }

    OElem primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            OElem r = expr();
            if (!peek(')')) fail("expected ')'");
            ++pos_;
            return r;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            OElem r;
            r.a0 = mpq_class(integer_literal());
            return r;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            return identifier(s_.substr(start, pos_ - start));
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    // Identifiers may be glued products of symbols such as "iF".
    OElem identifier(const std::string& id) {
        const std::string& w = O_.cm().name;
        OElem acc = O_.integer(1);
        size_t i = 0;
        while (i < id.size()) {
            if (id.compare(i, w.size(), w) == 0) {
                acc = O_.mul(acc, O_.w());
                i += w.size();
            } else if (id[i] == 'F') {
                acc = O_.mul(acc, O_.frob());
                ++i;
            } else {
                fail("unknown symbol '" + id + "'");
            }
        }
        return acc;
    }
};

}  // namespace

bool OElem::integral_coords() const { return denominator() == 1; }

mpz_class OElem::denominator() const {
    mpz_class d = 1;
    for (const auto* q : {&a0, &a1, &b0, &b1}) d = lcm_den(d, *q);
    return d;
}

OElem Order::integer(int64_t c) const {
    OElem r;
    r.a0 = static_cast<long>(c);
    return r;
}
OElem Order::w() const {
    OElem r;
    r.a1 = 1;
    return r;
}
OElem Order::frob() const {
    OElem r;
    r.b0 = 1;
    return r;
}

OElem Order::add(const OElem& x, const OElem& y) const {
    return {x.a0 + y.a0, x.a1 + y.a1, x.b0 + y.b0, x.b1 + y.b1};
}
OElem Order::sub(const OElem& x, const OElem& y) const {
    return {x.a0 - y.a0, x.a1 - y.a1, x.b0 - y.b0, x.b1 - y.b1};
}
OElem Order::neg(const OElem& x) const { return {-x.a0, -x.a1, -x.b0, -x.b1}; }
OElem Order::scale(const OElem& x, const mpq_class& c) const {
    return {x.a0 * c, x.a1 * c, x.b0 * c, x.b1 * c};
}

OElem Order::mul(const OElem& x, const OElem& y) const {
    KElem al{x.a0, x.a1}, be{x.b0, x.b1}, ga{y.a0, y.a1}, de{y.b0, y.b1};
    // (al + be F)(ga + de F) = (al ga - p be conj(de)) + (al de + be conj(ga)) F
    KElem t = kmul(cm_, be, kconj(cm_, de));
    KElem r0 = ksub(kmul(cm_, al, ga), KElem{t.c0 * cm_.p, t.c1 * cm_.p});
    KElem r1 = kadd(kmul(cm_, al, de), kmul(cm_, be, kconj(cm_, ga)));
    return {r0.c0, r0.c1, r1.c0, r1.c1};
}

OElem Order::conj(const OElem& x) const {
    KElem al = kconj(cm_, {x.a0, x.a1});
    return {al.c0, al.c1, -x.b0, -x.b1};
}

mpq_class Order::reduced_norm(const OElem& x) const { return mul(x, conj(x)).a0; }
mpq_class Order::reduced_trace(const OElem& x) const { return add(x, conj(x)).a0; }

OElem Order::parse(const std::string& s) const {
    std::string t = replace_all(s, "−", "-");
    t = replace_all(t, "·", "*");
    t = replace_all(t, "⋅", "*");
    return Parser(*this, t).run();
}

std::string Order::to_string(const OElem& x) const {
    std::ostringstream os;
    bool first = true;
    auto emit = [&](const mpq_class& c, const std::string& sym) {
        if (c == 0) return;
        mpq_class a = abs(c);
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        first = false;
        if (sym.empty() || a != 1) {
            os << a.get_str();
            if (!sym.empty()) os << "*";
        }
        os << sym;
    };
    emit(x.a0, "");
    emit(x.a1, cm_.name);
    emit(x.b0, "F");
    emit(x.b1, cm_.name + "F");
    if (first) os << "0";
    return os.str();
}

OMat omat_mul(const Order& O, const OMat& x, const OMat& y) {
    if (x.cols != y.rows) throw std::invalid_argument("order matrix product: dimension mismatch");
    OMat r(x.rows, y.cols);
    for (size_t i = 0; i < x.rows; ++i)
        for (size_t j = 0; j < y.cols; ++j)
            for (size_t k = 0; k < x.cols; ++k) r(i, j) = O.add(r(i, j), O.mul(x(i, k), y(k, j)));
    return r;
}

OMat omat_conj_transpose(const Order& O, const OMat& x) {
    OMat r(x.cols, x.rows);
    for (size_t i = 0; i < x.rows; ++i)
        for (size_t j = 0; j < x.cols; ++j) r(j, i) = O.conj(x(i, j));
    return r;
}

OMat omat_scalar(const Order& O, size_t n, int64_t c) {
    OMat r(n, n);
    for (size_t i = 0; i < n; ++i) r(i, i) = O.integer(c);
    return r;
}

OMat omat_identity(const Order& O, size_t n) { return omat_scalar(O, n, 1); }

OMat omat_parse(const Order& O, const std::vector<std::vector<std::string>>& entries) {
    if (entries.empty()) return OMat();
    OMat r(entries.size(), entries[0].size());
    for (size_t i = 0; i < r.rows; ++i) {
        if (entries[i].size() != r.cols) throw std::invalid_argument("order matrix: ragged rows");
        for (size_t j = 0; j < r.cols; ++j) r(i, j) = O.parse(entries[i][j]);
    }
    return r;
}

bool omat_is_hermitian(const Order& O, const OMat& x) { return x == omat_conj_transpose(O, x); }

}  // namespace st

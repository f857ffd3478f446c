#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace st {

// The endomorphism algebra of a supersingular curve over F_p, written as
// K + K F with K = Q(w) imaginary quadratic, w^2 + t w + n = 0, F^2 = -p and
// F a = conj(a) F for a in K.
struct CMData {
    std::string name = "i";  // symbol of w in expressions
    int64_t t = 0;           // w^2 + t w + n = 0
    int64_t n = 1;
    uint32_t p = 3;
};

// Element (a0 + a1 w) + (b0 + b1 w) F.
struct OElem {
    mpq_class a0 = 0, a1 = 0, b0 = 0, b1 = 0;

    bool is_zero() const { return a0 == 0 && a1 == 0 && b0 == 0 && b1 == 0; }
    bool operator==(const OElem& o) const { return a0 == o.a0 && a1 == o.a1 && b0 == o.b0 && b1 == o.b1; }
    bool operator!=(const OElem& o) const { return !(*this == o); }
    // True when all coefficients are integers.
    bool integral_coords() const;
    // Least common denominator of the coefficients.
    mpz_class denominator() const;
};

class Order {
public:
    explicit Order(CMData cm) : cm_(std::move(cm)) {}
    const CMData& cm() const { return cm_; }

    OElem integer(int64_t c) const;
    OElem w() const;
    OElem frob() const;

    OElem add(const OElem& x, const OElem& y) const;
    OElem sub(const OElem& x, const OElem& y) const;
    OElem neg(const OElem& x) const;
    OElem mul(const OElem& x, const OElem& y) const;
    OElem scale(const OElem& x, const mpq_class& c) const;
    // Canonical involution x -> x^*.
    OElem conj(const OElem& x) const;
    mpq_class reduced_norm(const OElem& x) const;
    mpq_class reduced_trace(const OElem& x) const;

    // Parses expressions such as "(1+i)*F", "-7/2*i + 2F + 1/2*iF", "3".
    // Juxtaposition means multiplication; the CM symbol is cm().name, and
    // Unicode minus and middle dot are accepted.
    OElem parse(const std::string& s) const;
    std::string to_string(const OElem& x) const;

private:
    CMData cm_;
};

// Matrix over the order.
struct OMat {
    size_t rows = 0, cols = 0;
    std::vector<OElem> a;

    OMat() = default;
    OMat(size_t r, size_t c) : rows(r), cols(c), a(r * c) {}
    OElem& operator()(size_t i, size_t j) { return a[i * cols + j]; }
    const OElem& operator()(size_t i, size_t j) const { return a[i * cols + j]; }
    bool operator==(const OMat& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

OMat omat_mul(const Order& O, const OMat& x, const OMat& y);
OMat omat_conj_transpose(const Order& O, const OMat& x);
OMat omat_identity(const Order& O, size_t n);
OMat omat_scalar(const Order& O, size_t n, int64_t c);
OMat omat_parse(const Order& O, const std::vector<std::vector<std::string>>& entries);
bool omat_is_hermitian(const Order& O, const OMat& x);

}  // namespace st

#include "ecred/quadint.hpp"

#include "ecred/errors.hpp"

namespace ecred {

namespace {

bool is_odd(const Int& n) { return mpz_odd_p(n.get_mpz_t()) != 0; }

bool d_is_1_mod_4(const Int& d) {
    Int r;
    mpz_fdiv_r_ui(r.get_mpz_t(), d.get_mpz_t(), 4);
    return r == 1;
}

}  // namespace

QuadInt::QuadInt(Int u, Int v, Int d, bool half) : d_(std::move(d)) {
    if (d_ == 0 || d_ == 1 || !is_squarefree(d_))
        throw InputError("QuadInt: d = " + to_string(d_) + " must be squarefree and not 0 or 1");
    if (half) {
        if (!d_is_1_mod_4(d_)) throw InputError("QuadInt: half-integral coefficients need d = 1 mod 4");
        if (is_odd(u) != is_odd(v)) throw InputError("QuadInt: u and v must have equal parity");
        U_ = std::move(u);
        V_ = std::move(v);
    } else {
        U_ = 2 * u;
        V_ = 2 * v;
    }
}

Int QuadInt::u() const { return half() ? U_ : Int(U_ / 2); }
Int QuadInt::v() const { return half() ? V_ : Int(V_ / 2); }
bool QuadInt::half() const { return is_odd(U_) || is_odd(V_); }

QuadInt QuadInt::conjugate() const { return QuadInt(Raw{}, U_, -V_, d_); }

Int QuadInt::norm() const { return Int((U_ * U_ - d_ * V_ * V_) / 4); }

void QuadInt::check_same_field(const QuadInt& o) const {
    if (d_ != o.d_) throw InputError("QuadInt: mixed fields Q(sqrt " + to_string(d_) + ") and Q(sqrt " + to_string(o.d_) + ")");
}

QuadInt& QuadInt::operator+=(const QuadInt& o) {
    check_same_field(o);
    U_ += o.U_;
    V_ += o.V_;
    return *this;
}

QuadInt& QuadInt::operator-=(const QuadInt& o) {
    check_same_field(o);
    U_ -= o.U_;
    V_ -= o.V_;
    return *this;
}

QuadInt& QuadInt::operator*=(const QuadInt& o) {
    check_same_field(o);
    // ((U1 U2 + d V1 V2) + (U1 V2 + U2 V1) sqrt d) / 4, halved back to the /2 form.
    Int u = U_ * o.U_ + d_ * V_ * o.V_;
    Int v = U_ * o.V_ + o.U_ * V_;
    if (is_odd(u) || is_odd(v)) throw InputError("QuadInt: product left the ring of integers");
    U_ = u / 2;
    V_ = v / 2;
    return *this;
}

QuadInt& QuadInt::operator*=(long s) {
    U_ *= s;
    V_ *= s;
    return *this;
}

std::string QuadInt::str() const {
    std::string sd = "sqrt(" + to_string(d_) + ")";
    Int u0 = u(), v0 = v();
    std::string body = to_string(u0) + (v0 < 0 ? "-" : "+") + to_string(Int(abs(v0))) + "*" + sd;
    return half() ? "(" + body + ")/2" : body;
}

}  // namespace ecred

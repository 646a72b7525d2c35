#pragma once

#include "ecred/arith.hpp"

#include <string>

namespace ecred {

// Integer of Q(sqrt d): (u + v sqrt d)/2 when half() is set (requires d = 1 mod 4 and
// u = v mod 2), u + v sqrt d otherwise. Arithmetic stays within the ring of integers.
class QuadInt {
public:
    QuadInt(Int u, Int v, Int d, bool half = false);
    static QuadInt integer(const Int& n, const Int& d) { return QuadInt(n, 0, d); }

    Int u() const;
    Int v() const;
    bool half() const;
    const Int& d() const { return d_; }

    /// Twice the rational part and twice the sqrt(d) coefficient.
    const Int& twice_rational() const { return U_; }
    const Int& twice_irrational() const { return V_; }

    QuadInt conjugate() const;
    Int norm() const;
    Int trace() const { return U_; }
    bool is_zero() const { return U_ == 0 && V_ == 0; }

    QuadInt& operator+=(const QuadInt& o);
    QuadInt& operator-=(const QuadInt& o);
    QuadInt& operator*=(const QuadInt& o);
    QuadInt& operator*=(long s);

    friend QuadInt operator+(QuadInt a, const QuadInt& b) { return a += b; }
    friend QuadInt operator-(QuadInt a, const QuadInt& b) { return a -= b; }
    friend QuadInt operator*(QuadInt a, const QuadInt& b) { return a *= b; }
    friend QuadInt operator*(QuadInt a, long s) { return a *= s; }
    friend QuadInt operator*(long s, QuadInt a) { return a *= s; }
    friend QuadInt operator-(QuadInt a) {
        a.U_ = -a.U_;
        a.V_ = -a.V_;
        return a;
    }
    friend bool operator==(const QuadInt& a, const QuadInt& b) {
        return a.d_ == b.d_ && a.U_ == b.U_ && a.V_ == b.V_;
    }

    std::string str() const;

private:
    struct Raw {};
    QuadInt(Raw, Int U, Int V, Int d) : U_(std::move(U)), V_(std::move(V)), d_(std::move(d)) {}
    void check_same_field(const QuadInt& o) const;

    Int U_, V_;  // value = (U_ + V_ sqrt d)/2
    Int d_;
};

}  // namespace ecred

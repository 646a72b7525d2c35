#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace ecred {

// Dense univariate polynomial over a commutative ring R, coefficients stored in
// ascending degree. The zero polynomial has no coefficients.
template <class R>
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<R> coeffs) : c_(std::move(coeffs)) { trim(); }
    Polynomial(std::initializer_list<R> coeffs) : c_(coeffs) { trim(); }

    static Polynomial constant(const R& a) { return Polynomial(std::vector<R>{a}); }
    static Polynomial x() { return Polynomial(std::vector<R>{R(0), R(1)}); }

    bool is_zero() const { return c_.empty(); }
    /// Degree; -1 for the zero polynomial.
    long degree() const { return static_cast<long>(c_.size()) - 1; }
    const std::vector<R>& coefficients() const { return c_; }
    R coeff(std::size_t i) const { return i < c_.size() ? c_[i] : R(0); }
    R leading() const { return c_.empty() ? R(0) : c_.back(); }

    template <class V>
    V eval(const V& at) const {
        V acc(0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * at + V(*it);
        return acc;
    }

    Polynomial& operator+=(const Polynomial& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), R(0));
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
        trim();
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), R(0));
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
        trim();
        return *this;
    }
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator-(Polynomial a) {
        for (auto& v : a.c_) v = -v;
        return a;
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<R> out(a.c_.size() + b.c_.size() - 1, R(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i] == 0) continue;
            for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
        }
        return Polynomial(std::move(out));
    }
    friend Polynomial operator*(Polynomial a, const R& s) {
        for (auto& v : a.c_) v *= s;
        a.trim();
        return a;
    }
    friend Polynomial operator*(const R& s, Polynomial a) { return std::move(a) * s; }
    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }

    Polynomial pow(unsigned e) const {
        Polynomial r = constant(R(1)), b = *this;
        while (e) {
            if (e & 1) r = r * b;
            b = b * b;
            e >>= 1;
        }
        return r;
    }

    /// Apply f coefficient-wise (e.g. reduction mod p), retrimming afterwards.
    template <class S, class F>
    Polynomial<S> map(F f) const {
        std::vector<S> out;
        out.reserve(c_.size());
        for (const auto& v : c_) out.push_back(f(v));
        return Polynomial<S>(std::move(out));
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }
    std::vector<R> c_;
};

}  // namespace ecred

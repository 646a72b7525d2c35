#pragma once

#include "ecred/arith.hpp"
#include "ecred/quadint.hpp"

#include <array>
#include <optional>
#include <string>

namespace ecred {

/// Standard b/c/discriminant quantities of a Weierstrass model over any commutative ring.
template <class R>
struct WeierstrassQuantities {
    R b2, b4, b6, b8, c4, c6, disc;
};

template <class R>
WeierstrassQuantities<R> weierstrass_quantities(const R& a1, const R& a2, const R& a3, const R& a4,
                                                const R& a6) {
    R b2 = a1 * a1 + 4 * a2;
    R b4 = 2 * a4 + a1 * a3;
    R b6 = a3 * a3 + 4 * a6;
    R b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    R c4 = b2 * b2 - 24 * b4;
    R c6 = -(b2 * b2 * b2) + 36 * b2 * b4 - 216 * b6;
    R disc = -(b2 * b2 * b8) - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
    return {b2, b4, b6, b8, c4, c6, disc};
}

using AInvariants = std::array<Rat, 5>;  // a1, a2, a3, a4, a6

struct Invariants : WeierstrassQuantities<Rat> {
    std::optional<Rat> j;  // present iff disc != 0
};

Invariants invariants(const AInvariants& a);

enum class Family { kkp, family3, family5, kubert5, e1k, e2k };

std::string family_name(Family f);
/// Throws InputError on an unknown name.
Family parse_family(const std::string& name);

/// Parameter of a named family: `t` is t (kkp, family3, family5) or lambda (kubert5);
/// e1k/e2k use k >= 1 and eps = +-1.
struct FamilyParam {
    Family family = Family::family3;
    Rat t = 0;
    long k = 1;
    int eps = 1;

    std::string str() const;
    friend bool operator==(const FamilyParam&, const FamilyParam&) = default;
};

// Elliptic curve over Q given by a general Weierstrass model with rational coefficients.
class Curve {
public:
    /// Throws SingularModelError when the discriminant vanishes.
    explicit Curve(AInvariants a, std::optional<FamilyParam> family = std::nullopt);
    static Curve from_ints(long a1, long a2, long a3, long a4, long a6);

    const AInvariants& a() const { return a_; }
    const Rat& a1() const { return a_[0]; }
    const Rat& a2() const { return a_[1]; }
    const Rat& a3() const { return a_[2]; }
    const Rat& a4() const { return a_[3]; }
    const Rat& a6() const { return a_[4]; }

    const Invariants& invariants() const { return inv_; }
    const Rat& discriminant() const { return inv_.disc; }
    const Rat& j() const { return *inv_.j; }

    /// Model u^i a_i with integer coefficients, u the lcm of the denominators.
    const std::array<Int, 5>& integral_model() const { return integral_; }
    const Int& integral_scale() const { return scale_; }
    const Int& integral_discriminant() const { return integral_disc_; }

    bool is_short() const { return a_[0] == 0 && a_[1] == 0 && a_[2] == 0; }
    bool is_integral() const { return scale_ == 1; }

    const std::optional<FamilyParam>& family() const { return family_; }

    std::string str() const;  // "[a1,a2,a3,a4,a6]"
    friend bool operator==(const Curve& x, const Curve& y) { return x.a_ == y.a_; }

private:
    AInvariants a_;
    Invariants inv_;
    std::array<Int, 5> integral_;
    Int scale_;
    Int integral_disc_;
    std::optional<FamilyParam> family_;
};

std::string render_ainvs(const AInvariants& a);

Invariants invariants(const Curve& c);

/// y^2 = x^3 - c4/48 x - c6/864; keeps c4, c6 and the discriminant.
Curve short_model(const Curve& c);

/// y^2 = x^3 + A d^2 x + B d^3 where y^2 = x^3 + A x + B is short_model(c).
Curve quadratic_twist(const Curve& c, const Int& d);

/// Isomorphism over Q-bar certificate: equal j and, for j = 0 or 1728, nothing more;
/// otherwise the twist class c6^2/c4^3 ratio must agree up to a square factor.
bool isomorphic_over_Q(const Curve& x, const Curve& y);

Curve make_family(const FamilyParam& p);

// Curve over Q(sqrt d) with integral coefficients.
struct CurveK {
    Int d;
    std::array<QuadInt, 5> a;

    static CurveK from_rational(const std::array<Int, 5>& a, const Int& d);
    CurveK conjugate() const;
    std::string str() const;
};

struct InvariantsK {
    QuadInt disc;
    QuadInt c4;
    QuadInt c6;
};

/// Throws SingularModelError if the discriminant is zero.
InvariantsK invariants_K(const CurveK& c);

}  // namespace ecred

#pragma once

#include "ecred/arith.hpp"
#include "ecred/curve.hpp"
#include "ecred/polynomial.hpp"

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ecred {

/// Odd m: psi_m as a polynomial in x. Even m: psi_m^2, with y^2 eliminated.
struct DivisionPolynomial {
    long m = 1;
    Polynomial<Rat> poly;
    bool squared = false;
};

constexpr long kMaxDivisionIndex = 30;

/// Throws ResourceError for m > kMaxDivisionIndex, InputError for m < 1.
DivisionPolynomial division_polynomial(const Curve& c, long m);

/// Polynomial whose roots are exactly the x-coordinates of the nontrivial m-torsion (m >= 2):
/// psi_m for odd m, (psi_m / psi_2) * psi_2^2 for even m.
Polynomial<Rat> torsion_x_polynomial(const Curve& c, long m);

/// Value of psi_m (odd m) or psi_m / psi_2 (even m) at x for residues a_i mod an odd prime p.
u64 division_value_mod_p(const std::array<u64, 5>& a, u64 x, long m, u64 p);

// Reduction of a curve at a prime of good reduction.
struct FpCurve {
    u64 p = 0;
    std::array<u64, 5> a{};

    bool contains(u64 x, u64 y) const;
};

/// Throws InputError when p is not prime or the reduction is bad.
FpCurve reduce_curve(const Curve& c, u64 p);

struct FpPoint {
    bool infinity = true;
    u64 x = 0, y = 0;

    static FpPoint at_infinity() { return {}; }
    static FpPoint affine(u64 x, u64 y) { return {false, x, y}; }
    friend bool operator==(const FpPoint&, const FpPoint&) = default;
};

/// Chord-tangent law on the long model. Off-curve inputs throw InputError.
FpPoint ec_add(const FpCurve& E, const FpPoint& P, const FpPoint& Q);
FpPoint ec_neg(const FpCurve& E, const FpPoint& P);
FpPoint ec_mul(const FpCurve& E, const Int& n, const FpPoint& P);

/// Exact order, found by factoring the group order and dividing out primes.
Int point_order(const FpCurve& E, const FpPoint& P);

/// All affine points, ascending in (x, y). Intended for small p.
std::vector<FpPoint> enumerate_points(const FpCurve& E);

using RationalPoint = std::array<Rat, 2>;

struct TorsionGroup {
    long n1 = 1;
    long n2 = 1;
    std::vector<RationalPoint> generators;  // on the input model

    long order() const { return n1 * n2; }
    /// "0", "Z/5", "Z/2 x Z/8".
    std::string str() const;
    bool same_structure(const TorsionGroup& o) const { return n1 == o.n1 && n2 == o.n2; }
};

/// Structure from "0", "Z/5", "Z/2 x Z/8" (also accepts "Z/2Z", "x" or "×").
TorsionGroup parse_torsion_structure(const std::string& s);

/// gcd of |E~_p(F_p)| over the first `count` good odd primes.
Int torsion_reduction_bound(const Curve& c, int count = 15);

/// Exact E(Q)_tors by an exhaustive Lutz-Nagell search on y^2 = x^3 - 27 c4 x - 54 c6.
/// Throws ResourceError when the discriminant cannot be factored by trial division up to 10^7.
TorsionGroup torsion_over_Q(const Curve& c);

/// Odd part of |E(Q(sqrt d))_tors| = odd part of |E(Q)_tors| times that of |E^d(Q)_tors|.
Int odd_torsion_over_quadratic(const Curve& c, const Int& d);

/// gcd of count_at_quadratic_prime over odd unramified good p <= X.
Int quadratic_torsion_bound(const Curve& c, const Int& d, u64 X);

Int odd_part(Int n);

struct TorsionCatalog {
    std::set<long> S1, S2, S3;
};

const TorsionCatalog& torsion_catalog();

/// Membership of m in S_degree. Throws InputError for degree outside {1, 2, 3} or m < 2.
bool admissible(long m, int degree);

struct Phi2Row {
    TorsionGroup over_Q;
    std::vector<TorsionGroup> over_K;
};

/// Possible torsion over quadratic fields for each torsion group over Q.
const std::vector<Phi2Row>& phi2_table();

/// True iff H occurs in the row of G.
bool phi2_contains(const TorsionGroup& G, const TorsionGroup& H);

}  // namespace ecred

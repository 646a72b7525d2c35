#pragma once

#include "ecred/arith.hpp"
#include "ecred/curve.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace ecred {

enum class ReductionType { Good, SplitMultiplicative, NonsplitMultiplicative, Additive };

std::string to_string(ReductionType t);

struct Kodaira {
    enum class Kind { I, II, III, IV, Istar, IVstar, IIIstar, IIstar };
    Kind kind = Kind::I;
    long n = 0;  // index for I_n and I_n*

    static Kodaira I(long n) { return {Kind::I, n}; }
    static Kodaira Istar(long n) { return {Kind::Istar, n}; }
    static Kodaira of(Kind k) { return {k, 0}; }

    std::string str() const;  // "I0", "I5", "II", "I0*", "I3*", "IV*", ...
    friend bool operator==(const Kodaira&, const Kodaira&) = default;
};

using IntModel = std::array<Int, 5>;

struct LocalData {
    Int p;
    ReductionType type = ReductionType::Good;
    Kodaira kodaira;
    long vdisc_min = 0;
    long conductor_exponent = 0;
    long tamagawa = 1;
    /// |E~_p(F_p)| for good p; p, p+2, p+1 for split, non-split, additive reduction.
    /// Left empty at good p above the counting ceiling.
    std::optional<Int> m_p;
    /// A p-minimal, p-integral model reached by the algorithm.
    IntModel minimal_model;
};

/// Tate's algorithm on an integral model at the prime p.
LocalData tate(const IntModel& model, const Int& p);

/// Local data of c at p; the rational model is scaled to an integral one first.
LocalData local_data(const Curve& c, const Int& p);

/// Points on the smooth locus of the reduction: m_p for good p, p-1, p+1, p otherwise.
Int smooth_locus_order(const LocalData& ld);

/// Per-prime counting ceiling; ECRED_COUNT_CEILING overrides the 10^7 default.
u64 count_ceiling();

struct PointCount {
    u64 p = 0;
    unsigned n = 1;
    Int N;
    bool good = true;
    std::optional<Int> a;  // trace of Frobenius, good reduction only
};

/// Projective F_p-points of y^2 + a1xy + a3y = x^3 + a2x^2 + a4x + a6 with residues a_i.
/// Singular models are allowed.
u64 count_points_mod_p(const std::array<u64, 5>& a, u64 p);

/// Reduction of a p-minimal model of c at p; sets `good`.
std::array<u64, 5> reduced_model(const Curve& c, u64 p, bool& good);

/// |E~_p(F_p)| of the p-minimal model; at bad p this equals m_p.
PointCount count_points_fp(const Curve& c, u64 p);

/// N_n = p^n + 1 - a_n from a_{k+2} = a a_{k+1} - p a_k with a_0 = 2.
PointCount count_extension(const Int& a, u64 p, unsigned n);

/// Closed forms for n = 2, 3 in terms of N1 = |E~(F_p)| and its non-square twist 2p+2-N1.
Int closed_form_extension_count(const Int& N1, u64 p, unsigned n);

/// Brute-force |E~(F_{p^2})| over F_p[s]/(s^2 - r), r the least non-residue. p odd, p <= 200.
Int count_fp2_direct(const Curve& c, u64 p);

/// Least quadratic non-residue mod an odd prime.
u64 least_nonresidue(u64 p);

/// Direct count of the reduction twisted by the residue r, p odd.
u64 count_twist_fp(const Curve& c, u64 p, u64 r);

/// True iff the twist by the least non-residue has 2p+2-N1 points (p odd, good).
bool twist_count_identity_check(const Curve& c, u64 p);

struct QuadraticPrimeSplitting {
    enum class Kind { split, inert, ramified };
    u64 p = 0;
    Int d;
    Kind kind = Kind::split;
    int e = 1;
    int f = 1;
};

std::string to_string(QuadraticPrimeSplitting::Kind k);

QuadraticPrimeSplitting splitting(const Int& d, u64 p);

/// |E~_P(k_P)| for the primes P | p of Q(sqrt d), E defined over Q.
/// Throws UnsupportedPrimeError for p = 2 or p | d, InputError at bad p.
Int count_at_quadratic_prime(const Curve& c, const Int& d, u64 p);

struct QuadraticPrimeCounts {
    u64 p = 0;
    QuadraticPrimeSplitting::Kind kind = QuadraticPrimeSplitting::Kind::split;
    bool bad = false;
    /// split: [count at sqrt d -> r, count at sqrt d -> -r] with r = sqrt_mod(d, p);
    /// inert: a single F_{p^2} count. Empty when bad.
    std::vector<Int> counts;
};

/// Counts of a curve over Q(sqrt d) at the primes above an odd p with p not dividing d.
QuadraticPrimeCounts count_curveK_at_prime(const CurveK& c, u64 p);

/// Number of projective points of y^2 = x^3 + A x + B over F_p[s]/(s^2 - r), r a non-residue;
/// A = A0 + A1 s, B = B0 + B1 s.
Int count_short_fp2(u64 A0, u64 A1, u64 B0, u64 B1, u64 r, u64 p);

}  // namespace ecred

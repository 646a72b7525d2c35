#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ecred {

using Int = mpz_class;
using Rat = mpq_class;
using u64 = std::uint64_t;

/// Rational in lowest terms with positive denominator.
Rat make_rat(const Int& num, const Int& den = 1);

/// Exact p-adic valuation; `exponent` is empty for the input 0 (valuation +infinity).
struct PVal {
    Int prime;
    std::optional<long> exponent;

    bool infinite() const { return !exponent.has_value(); }
    friend bool operator==(const PVal&, const PVal&) = default;
};

PVal valuation(const Int& n, const Int& p);

/// Valuation of a nonzero rational; nullopt for zero.
std::optional<long> valuation(const Rat& q, const Int& p);

bool is_prime(const Int& n);
bool is_squarefree(const Int& d);

/// Legendre symbol (a/p) for an odd prime p. Throws InputError otherwise.
int legendre(const Int& a, const Int& p);

/// Smaller of the two square roots of a mod p, if a is a square.
std::optional<Int> sqrt_mod(const Int& a, const Int& p);

// Word-size kernels used by the scanning loops. No argument validation.
inline u64 mulmod(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<unsigned __int128>(a) * b % m);
}
u64 powmod(u64 base, u64 exp, u64 m);
u64 invmod(u64 a, u64 m);
int legendre_u64(u64 a, u64 p);
std::optional<u64> sqrt_mod_u64(u64 a, u64 p);
/// a mod p in [0, p) for an arbitrary-precision a.
u64 mod_u64(const Int& a, u64 p);
/// Rational reduced mod p; the denominator must be prime to p.
u64 mod_u64(const Rat& a, u64 p);

/// Upper bound for prime enumeration; ECRED_SCAN_CEILING overrides the 10^8 default.
u64 scan_ceiling();

/// Primes in [lo, hi], ascending. Throws ResourceError if hi exceeds the ceiling.
std::vector<u64> primes_in_range(u64 lo, u64 hi);
std::vector<u64> primes_in_range(u64 lo, u64 hi, u64 ceiling);

struct Factorization {
    std::vector<std::pair<Int, int>> factors;  // ascending primes with exponents
    Int sign = 1;
};

/// Trial division up to `limit`. A leftover cofactor is accepted when it passes a
/// primality test; a composite leftover throws ResourceError.
Factorization factor(const Int& n, u64 limit = 10'000'000);

/// Factorization of a word-size integer by trial division.
std::vector<std::pair<u64, int>> factor_u64(u64 n);

std::string to_string(const Int& n);
std::string to_string(const Rat& q);

}  // namespace ecred

#include "ecred/arith.hpp"

#include "ecred/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace ecred {

Rat make_rat(const Int& num, const Int& den) {
    if (den == 0) throw InputError("zero denominator");
    Rat q(num, den);
    q.canonicalize();
    return q;
}

PVal valuation(const Int& n, const Int& p) {
    if (!is_prime(p)) throw InputError("valuation: modulus " + to_string(p) + " is not prime");
    if (n == 0) return {p, std::nullopt};
    Int m = abs(n);
    long e = 0;
    e = static_cast<long>(mpz_remove(m.get_mpz_t(), m.get_mpz_t(), p.get_mpz_t()));
    return {p, e};
}

std::optional<long> valuation(const Rat& q, const Int& p) {
    if (q == 0) return std::nullopt;
    return *valuation(q.get_num(), p).exponent - *valuation(q.get_den(), p).exponent;
}

bool is_prime(const Int& n) {
    if (n < 2) return false;
    return mpz_probab_prime_p(n.get_mpz_t(), 30) > 0;
}

bool is_squarefree(const Int& d) {
    if (d == 0) return false;
    for (const auto& [q, e] : factor(d).factors)
        if (e > 1) return false;
    return true;
}

int legendre(const Int& a, const Int& p) {
    if (p == 2 || !is_prime(p)) throw InputError("legendre: " + to_string(p) + " is not an odd prime");
    return mpz_legendre(a.get_mpz_t(), p.get_mpz_t());
}

std::optional<Int> sqrt_mod(const Int& a, const Int& p) {
    int l = legendre(a, p);
    if (l < 0) return std::nullopt;
    Int r;
    if (l == 0) return Int(0);
    if (p.fits_ulong_p()) {
        r = static_cast<unsigned long>(*sqrt_mod_u64(mod_u64(a, p.get_ui()), p.get_ui()));
        return r;
    }
    // Tonelli-Shanks in arbitrary precision.
    Int am;
    mpz_mod(am.get_mpz_t(), a.get_mpz_t(), p.get_mpz_t());
    Int q = p - 1;
    unsigned long s = mpz_scan1(q.get_mpz_t(), 0);
    q >>= s;
    Int z = 2;
    while (mpz_legendre(z.get_mpz_t(), p.get_mpz_t()) != -1) ++z;
    Int c, x, t, b;
    mpz_powm(c.get_mpz_t(), z.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
    Int e = (q + 1) / 2;
    mpz_powm(x.get_mpz_t(), am.get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
    mpz_powm(t.get_mpz_t(), am.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
    unsigned long m = s;
    while (t != 1) {
        unsigned long i = 0;
        Int tt = t;
        while (tt != 1) {
            tt = tt * tt % p;
            ++i;
        }
        b = c;
        for (unsigned long j = 0; j + 1 < m - i; ++j) b = b * b % p;
        x = x * b % p;
        c = b * b % p;
        t = t * c % p;
        m = i;
    }
    Int other = p - x;
    return x < other ? x : other;
}

u64 powmod(u64 base, u64 exp, u64 m) {
    u64 r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return r;
}

u64 invmod(u64 a, u64 m) {
    std::int64_t t = 0, nt = 1;
    std::int64_t r = static_cast<std::int64_t>(m), nr = static_cast<std::int64_t>(a % m);
    while (nr) {
        std::int64_t q = r / nr;
        std::tie(t, nt) = std::make_pair(nt, t - q * nt);
        std::tie(r, nr) = std::make_pair(nr, r - q * nr);
    }
    if (r != 1) throw InputError("invmod: not invertible");
    return static_cast<u64>(t < 0 ? t + static_cast<std::int64_t>(m) : t);
}

int legendre_u64(u64 a, u64 p) {
    a %= p;
    if (a == 0) return 0;
    return powmod(a, (p - 1) / 2, p) == 1 ? 1 : -1;
}

std::optional<u64> sqrt_mod_u64(u64 a, u64 p) {
    a %= p;
    if (a == 0) return 0;
    if (p == 2) return a;
    if (legendre_u64(a, p) != 1) return std::nullopt;
    u64 q = p - 1;
    int s = 0;
    while ((q & 1) == 0) {
        q >>= 1;
        ++s;
    }
    u64 z = 2;
    while (legendre_u64(z, p) != -1) ++z;
    u64 c = powmod(z, q, p);
    u64 x = powmod(a, (q + 1) / 2, p);
    u64 t = powmod(a, q, p);
    int m = s;
    while (t != 1) {
        int i = 0;
        for (u64 tt = t; tt != 1; tt = mulmod(tt, tt, p)) ++i;
        u64 b = c;
        for (int j = 0; j < m - i - 1; ++j) b = mulmod(b, b, p);
        x = mulmod(x, b, p);
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        m = i;
    }
    return std::min(x, p - x);
}

u64 mod_u64(const Int& a, u64 p) {
    return mpz_fdiv_ui(a.get_mpz_t(), p);
}

u64 mod_u64(const Rat& a, u64 p) {
    u64 den = mod_u64(a.get_den(), p);
    if (den == 0) throw InputError("denominator divisible by " + std::to_string(p));
    return mulmod(mod_u64(a.get_num(), p), invmod(den, p), p);
}

u64 scan_ceiling() {
    if (const char* env = std::getenv("ECRED_SCAN_CEILING")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && v > 0) return v;
    }
    return 100'000'000ULL;
}

namespace {

std::vector<u64> small_primes_upto(u64 n) {
    std::vector<u64> out;
    if (n < 2) return out;
    std::vector<char> composite(n + 1, 0);
    for (u64 i = 2; i <= n; ++i) {
        if (composite[i]) continue;
        out.push_back(i);
        for (u64 j = i * i; j <= n; j += i) composite[j] = 1;
    }
    return out;
}

}  // namespace

std::vector<u64> primes_in_range(u64 lo, u64 hi) {
    return primes_in_range(lo, hi, scan_ceiling());
}

std::vector<u64> primes_in_range(u64 lo, u64 hi, u64 ceiling) {
    if (lo > hi) throw InputError("primes_in_range: lo > hi");
    if (hi > ceiling)
        throw ResourceError("prime bound " + std::to_string(hi) + " exceeds scan ceiling " +
                            std::to_string(ceiling));
    constexpr u64 kDirectLimit = 1'000'000;
    if (hi <= kDirectLimit) {
        auto all = small_primes_upto(hi);
        auto first = std::lower_bound(all.begin(), all.end(), lo);
        return {first, all.end()};
    }
    const u64 root = static_cast<u64>(std::sqrt(static_cast<long double>(hi))) + 1;
    const auto base = small_primes_upto(root);
    std::vector<u64> out;
    constexpr u64 kSegment = 1 << 18;
    std::vector<char> composite(kSegment);
    for (u64 start = std::max<u64>(lo, 2); start <= hi; start += kSegment) {
        const u64 end = std::min(hi, start + kSegment - 1);
        std::fill(composite.begin(), composite.end(), 0);
        for (u64 q : base) {
            if (q * q > end) break;
            u64 first = std::max(q * q, (start + q - 1) / q * q);
            for (u64 j = first; j <= end; j += q) composite[j - start] = 1;
        }
        for (u64 n = start; n <= end; ++n)
            if (!composite[n - start]) out.push_back(n);
        if (end == hi) break;
    }
    return out;
}

Factorization factor(const Int& n, u64 limit) {
    if (n == 0) throw InputError("factor: zero");
    Factorization f;
    f.sign = n < 0 ? -1 : 1;
    Int m = abs(n);
    auto take = [&](u64 q) {
        int e = 0;
        while (mpz_divisible_ui_p(m.get_mpz_t(), q)) {
            mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), q);
            ++e;
        }
        if (e) f.factors.emplace_back(Int(static_cast<unsigned long>(q)), e);
    };
    take(2);
    take(3);
    for (u64 q = 5; q <= limit; q += 6) {
        if (m == 1) break;
        if (Int(static_cast<unsigned long>(q)) * q > m) break;
        take(q);
        take(q + 2);
    }
    if (m != 1) {
        if (is_prime(m)) {
            f.factors.emplace_back(m, 1);
        } else {
            throw ResourceError("factor: cofactor " + to_string(m) + " has no factor below " +
                                std::to_string(limit));
        }
    }
    std::sort(f.factors.begin(), f.factors.end());
    return f;
}

std::vector<std::pair<u64, int>> factor_u64(u64 n) {
    std::vector<std::pair<u64, int>> out;
    for (u64 q = 2; q * q <= n; q += (q == 2 ? 1 : 2)) {
        if (n % q) continue;
        int e = 0;
        while (n % q == 0) {
            n /= q;
            ++e;
        }
        out.emplace_back(q, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

std::string to_string(const Int& n) { return n.get_str(); }

std::string to_string(const Rat& q) { return q.get_str(); }

}  // namespace ecred

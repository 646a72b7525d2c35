#include "ecred/reduction.hpp"

#include "ecred/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace ecred {

std::string to_string(ReductionType t) {
    switch (t) {
        case ReductionType::Good: return "good";
        case ReductionType::SplitMultiplicative: return "split_multiplicative";
        case ReductionType::NonsplitMultiplicative: return "nonsplit_multiplicative";
        case ReductionType::Additive: return "additive";
    }
    return "?";
}

std::string Kodaira::str() const {
    switch (kind) {
        case Kind::I: return "I" + std::to_string(n);
        case Kind::II: return "II";
        case Kind::III: return "III";
        case Kind::IV: return "IV";
        case Kind::Istar: return "I" + std::to_string(n) + "*";
        case Kind::IVstar: return "IV*";
        case Kind::IIIstar: return "III*";
        case Kind::IIstar: return "II*";
    }
    return "?";
}

std::string to_string(QuadraticPrimeSplitting::Kind k) {
    switch (k) {
        case QuadraticPrimeSplitting::Kind::split: return "split";
        case QuadraticPrimeSplitting::Kind::inert: return "inert";
        case QuadraticPrimeSplitting::Kind::ramified: return "ramified";
    }
    return "?";
}

u64 count_ceiling() {
    if (const char* env = std::getenv("ECRED_COUNT_CEILING")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return v;
    }
    return 10'000'000ULL;
}

namespace {

Int mod(const Int& a, const Int& m) {
    Int r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

bool divides(const Int& p, const Int& a) { return mpz_divisible_p(a.get_mpz_t(), p.get_mpz_t()) != 0; }

Int inv(const Int& a, const Int& p) {
    Int r;
    Int am = mod(a, p);
    if (mpz_invert(r.get_mpz_t(), am.get_mpz_t(), p.get_mpz_t()) == 0)
        throw std::logic_error("tate: non-invertible residue");
    return r;
}

long vp(const Int& a, const Int& p) {
    if (a == 0) return 1L << 40;
    Int t = a;
    return static_cast<long>(mpz_remove(t.get_mpz_t(), t.get_mpz_t(), p.get_mpz_t()));
}

Int exact_div(const Int& a, const Int& b) {
    if (!divides(b, a)) throw std::logic_error("tate: expected divisibility failed");
    Int q;
    mpz_divexact(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

struct Model {
    Int a1, a2, a3, a4, a6;

    // (x, y) -> (x + r, y + s x + t)
    void transform(const Int& r, const Int& s, const Int& t) {
        Int n1 = a1 + 2 * s;
        Int n2 = a2 - s * a1 + 3 * r - s * s;
        Int n3 = a3 + r * a1 + 2 * t;
        Int n4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t;
        Int n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        a1 = n1, a2 = n2, a3 = n3, a4 = n4, a6 = n6;
    }

    WeierstrassQuantities<Int> q() const { return weierstrass_quantities(a1, a2, a3, a4, a6); }
    IntModel arr() const { return {a1, a2, a3, a4, a6}; }
};

// Distinct roots in F_p of a T^2 + b T + c with a a unit.
int quadratic_roots(const Int& a, const Int& b, const Int& c, const Int& p) {
    if (p == 2) {
        int n = 0;
        for (int T = 0; T < 2; ++T)
            if (divides(p, a * T * T + b * T + c)) ++n;
        return n;
    }
    Int disc = b * b - 4 * a * c;
    int l = mpz_legendre(mod(disc, p).get_mpz_t(), p.get_mpz_t());
    return l == 0 ? 1 : (l == 1 ? 2 : 0);
}

// Monic cubic T^3 + b T^2 + c T + d over F_p, p prime.
struct Cubic {
    Int b, c, d, p;

    Int eval(const Int& T) const { return mod(((T + b) * T + c) * T + d, p); }
    Int deriv(const Int& T) const { return mod((3 * T + 2 * b) * T + c, p); }

    Int disc() const {
        return mod(b * b * c * c - 4 * c * c * c - 4 * b * b * b * d - 27 * d * d + 18 * b * c * d, p);
    }

    // Residue arithmetic in F_p[T]/(cubic), elements as {e0, e1, e2}.
    using Elt = std::array<Int, 3>;
    Elt mul(const Elt& x, const Elt& y) const {
        Int prod[5];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) prod[i + j] += x[i] * y[j];
        // T^3 = -b T^2 - c T - d
        for (int k = 4; k >= 3; --k) {
            Int h = mod(prod[k], p);
            prod[k - 1] -= h * b;
            prod[k - 2] -= h * c;
            prod[k - 3] -= h * d;
            prod[k] = 0;
        }
        return {mod(prod[0], p), mod(prod[1], p), mod(prod[2], p)};
    }

    // gcd(cubic, T^p - T) has degree equal to the number of distinct roots.
    int distinct_roots() const {
        if (p <= 3) {
            int n = 0;
            for (long T = 0; T < p.get_si(); ++T)
                if (eval(T) == 0) ++n;
            return n;
        }
        Elt result{Int(1), Int(0), Int(0)}, base{Int(0), Int(1), Int(0)};
        Int e = p;
        while (e > 0) {
            if (mpz_odd_p(e.get_mpz_t())) result = mul(result, base);
            base = mul(base, base);
            e >>= 1;
        }
        result[1] = mod(result[1] - 1, p);
        // gcd of the cubic with r0 + r1 T + r2 T^2
        std::vector<Int> f{mod(d, p), mod(c, p), mod(b, p), Int(1)};
        std::vector<Int> g{result[0], result[1], result[2]};
        auto trim = [&](std::vector<Int>& v) {
            while (!v.empty() && v.back() == 0) v.pop_back();
        };
        trim(g);
        if (g.empty()) return 3;
        while (!g.empty()) {
            // f mod g
            Int li = inv(g.back(), p);
            while (f.size() >= g.size()) {
                Int coef = mod(f.back() * li, p);
                size_t shift = f.size() - g.size();
                for (size_t i = 0; i < g.size(); ++i) f[shift + i] = mod(f[shift + i] - coef * g[i], p);
                trim(f);
                if (f.empty()) break;
            }
            std::swap(f, g);
        }
        return static_cast<int>(f.size()) - 1;
    }

    // Root of multiplicity >= 2, assuming disc = 0.
    Int double_root() const {
        if (p >= 5) {
            Int den = 2 * (b * b - 3 * c);
            return mod((9 * d - b * c) * inv(den, p), p);
        }
        for (long T = 0; T < p.get_si(); ++T)
            if (eval(T) == 0 && deriv(T) == 0) return T;
        throw std::logic_error("tate: no double root");
    }

    Int triple_root() const {
        if (p >= 5) return mod(-b * inv(Int(3), p), p);
        for (long T = 0; T < p.get_si(); ++T)
            if (eval(T) == 0) return T;
        throw std::logic_error("tate: no triple root");
    }
};

}  // namespace

LocalData tate(const IntModel& model, const Int& p) {
    if (p < 2 || !is_prime(p)) throw InputError("tate: " + to_string(p) + " is not prime");
    Model E{model[0], model[1], model[2], model[3], model[4]};
    if (E.q().disc == 0) throw SingularModelError("tate: singular model");
    const bool p2 = p == 2, p3 = p == 3;
    const Int p2p = p * p, p3p = p2p * p, p4p = p3p * p;
    const Int inv2 = p2 ? Int(0) : inv(Int(2), p);

    for (;;) {
        auto q = E.q();
        const long vD = vp(q.disc, p);
        LocalData ld;
        ld.p = p;
        ld.vdisc_min = vD;
        auto done = [&](ReductionType t, Kodaira k, long f, long c) {
            ld.type = t;
            ld.kodaira = k;
            ld.conductor_exponent = f;
            ld.tamagawa = c;
            ld.minimal_model = E.arr();
            switch (t) {
                case ReductionType::SplitMultiplicative: ld.m_p = p; break;
                case ReductionType::NonsplitMultiplicative: ld.m_p = p + 2; break;
                case ReductionType::Additive: ld.m_p = p + 1; break;
                case ReductionType::Good:
                    if (p.fits_ulong_p() && p.get_ui() <= count_ceiling()) {
                        u64 pu = p.get_ui();
                        std::array<u64, 5> r{};
                        for (int i = 0; i < 5; ++i) r[i] = mod_u64(ld.minimal_model[i], pu);
                        ld.m_p = Int(std::to_string(count_points_mod_p(r, pu)));
                    }
                    break;
            }
            return ld;
        };

        if (vD == 0) return done(ReductionType::Good, Kodaira::I(0), 0, 1);

        // Move the singular point of the reduction to (0, 0).
        Int r, t;
        if (p2) {
            if (divides(p, q.b2)) {
                r = mod(E.a4, p);
                t = mod(r * (1 + E.a2 + r) + E.a6, p);
            } else {
                r = mod(E.a3, p);
                t = mod(r + E.a4, p);
            }
        } else if (p3) {
            r = mod(divides(p, q.b2) ? Int(-q.b6) : Int(-q.b2 * q.b4), p);
            t = mod(E.a1 * r + E.a3, p);
        } else {
            if (divides(p, q.c4))
                r = mod(-q.b2 * inv(Int(12), p), p);
            else
                r = mod(-(q.c6 + q.b2 * q.c4) * inv(Int(12 * q.c4), p), p);
            t = mod(-(E.a1 * r + E.a3) * inv2, p);
        }
        E.transform(r, 0, t);
        q = E.q();
        if (!divides(p, E.a3) || !divides(p, E.a4) || !divides(p, E.a6))
            throw std::logic_error("tate: singular point not moved to the origin");

        if (!divides(p, q.b2)) {
            bool split = p2 ? divides(p, E.a2) : mpz_legendre(mod(q.b2, p).get_mpz_t(), p.get_mpz_t()) == 1;
            long c = split ? vD : (vD % 2 ? 1 : 2);
            return done(split ? ReductionType::SplitMultiplicative : ReductionType::NonsplitMultiplicative,
                        Kodaira::I(vD), 1, c);
        }
        if (!divides(p2p, E.a6)) return done(ReductionType::Additive, Kodaira::of(Kodaira::Kind::II), vD, 1);
        if (!divides(p3p, q.b8)) return done(ReductionType::Additive, Kodaira::of(Kodaira::Kind::III), vD - 1, 2);
        if (!divides(p3p, q.b6)) {
            int n = quadratic_roots(Int(1), exact_div(E.a3, p), Int(-exact_div(E.a6, p2p)), p);
            return done(ReductionType::Additive, Kodaira::of(Kodaira::Kind::IV), vD - 2, n ? 3 : 1);
        }

        // Arrange p | a1, a2 and p^2 | a3, a4 and p^3 | a6.
        Int s;
        if (p2) {
            s = mod(E.a2, p);
            t = 2 * mod(exact_div(E.a6, Int(4)), p);
        } else {
            s = mod(-E.a1 * inv2, p);
            t = mod(-E.a3 * inv2, p2p);
        }
        E.transform(0, s, t);

        Cubic P{mod(exact_div(E.a2, p), p), mod(exact_div(E.a4, p2p), p), mod(exact_div(E.a6, p3p), p), p};
        if (P.disc() != 0) {
            return done(ReductionType::Additive, Kodaira::Istar(0), vD - 4, 1 + P.distinct_roots());
        }

        Int bb3c = mod(P.b * P.b - 3 * P.c, p);
        if (bb3c != 0) {
            // Double root: I_n*.
            E.transform(p * P.double_root(), 0, 0);
            long ix = 3, iy = 3;
            Int mx = p2p, my = p2p;
            long cp = 0;
            for (;;) {
                Int xa2 = exact_div(E.a2, p);
                Int xa3 = exact_div(E.a3, my);
                Int xa6 = exact_div(E.a6, mx * my);
                if (divides(p, xa3 * xa3 + 4 * xa6)) {
                    Int tt = p2 ? Int(my * mod(xa6, p)) : Int(my * mod(-xa3 * inv2, p));
                    E.transform(0, 0, tt);
                    my *= p;
                    ++iy;
                    xa2 = exact_div(E.a2, p);
                    Int xa4 = exact_div(E.a4, p * mx);
                    xa6 = exact_div(E.a6, mx * my);
                    if (divides(p, xa4 * xa4 - 4 * xa2 * xa6)) {
                        Int rr = p2 ? Int(mx * mod(xa6 * xa2, p)) : Int(mx * mod(-xa4 * inv(Int(2 * xa2), p), p));
                        E.transform(rr, 0, 0);
                        mx *= p;
                        ++ix;
                        continue;
                    }
                    cp = quadratic_roots(xa2, xa4, xa6, p) ? 4 : 2;
                    break;
                }
                cp = quadratic_roots(Int(1), xa3, Int(-xa6), p) ? 4 : 2;
                break;
            }
            long n = ix + iy - 5;
            return done(ReductionType::Additive, Kodaira::Istar(n), vD - ix - iy + 1, cp);
        }

        // Triple root.
        E.transform(p * P.triple_root(), 0, 0);
        Int x3 = exact_div(E.a3, p2p);
        Int x6 = exact_div(E.a6, p4p);
        if (!divides(p, x3 * x3 + 4 * x6)) {
            int n = quadratic_roots(Int(1), x3, Int(-x6), p);
            return done(ReductionType::Additive, Kodaira::of(Kodaira::Kind::IVstar), vD - 6, n ? 3 : 1);
        }
        E.transform(0, 0, p2 ? Int(p2p * mod(x6, p)) : Int(p2p * mod(-x3 * inv2, p)));
        if (!divides(p4p, E.a4)) return done(ReductionType::Additive, Kodaira::of(Kodaira::Kind::IIIstar), vD - 7, 2);
        if (!divides(p4p * p2p, E.a6))
            return done(ReductionType::Additive, Kodaira::of(Kodaira::Kind::IIstar), vD - 8, 1);

        // Not minimal: scale down and restart.
        E.a1 = exact_div(E.a1, p);
        E.a2 = exact_div(E.a2, p2p);
        E.a3 = exact_div(E.a3, p3p);
        E.a4 = exact_div(E.a4, p4p);
        E.a6 = exact_div(E.a6, p4p * p2p);
    }
}

LocalData local_data(const Curve& c, const Int& p) { return tate(c.integral_model(), p); }

Int smooth_locus_order(const LocalData& ld) {
    switch (ld.type) {
        case ReductionType::Good:
            if (!ld.m_p) throw ResourceError("prime " + to_string(ld.p) + " exceeds the counting ceiling");
            return *ld.m_p;
        case ReductionType::SplitMultiplicative: return ld.p - 1;
        case ReductionType::NonsplitMultiplicative: return ld.p + 1;
        case ReductionType::Additive: return ld.p;
    }
    return 0;
}

namespace {

// chi[v] = (v/p) for odd p.
std::vector<signed char> residue_table(u64 p) {
    std::vector<signed char> chi(p, -1);
    chi[0] = 0;
    u64 sq = 0;
    for (u64 i = 1; i <= p / 2; ++i) {
        sq += 2 * i - 1;
        if (sq >= p) sq %= p;
        chi[sq] = 1;
    }
    return chi;
}

struct BMod {
    u64 b2, b4, b6;
};

BMod b_mod(const std::array<u64, 5>& a, u64 p) {
    u64 a1 = a[0] % p, a2 = a[1] % p, a3 = a[2] % p, a4 = a[3] % p, a6 = a[4] % p;
    u64 b2 = (mulmod(a1, a1, p) + mulmod(4 % p, a2, p)) % p;
    u64 b4 = (mulmod(2 % p, a4, p) + mulmod(a1, a3, p)) % p;
    u64 b6 = (mulmod(a3, a3, p) + mulmod(4 % p, a6, p)) % p;
    return {b2, b4, b6};
}

inline u64 addm(u64 x, u64 y, u64 p) {
    u64 s = x + y;
    return s >= p ? s - p : s;
}
inline u64 subm(u64 x, u64 y, u64 p) { return x >= y ? x - y : x + p - y; }

}  // namespace

u64 count_points_mod_p(const std::array<u64, 5>& a, u64 p) {
    if (p == 2) {
        u64 n = 1;
        for (u64 x = 0; x < 2; ++x)
            for (u64 y = 0; y < 2; ++y) {
                u64 lhs = y * y + a[0] * x * y + a[2] * y;
                u64 rhs = x * x * x + a[1] * x * x + a[3] * x + a[4];
                if ((lhs + rhs) % 2 == 0) ++n;
            }
        return n;
    }
    // (2y + a1 x + a3)^2 = F(x) = 4x^3 + b2 x^2 + 2 b4 x + b6
    auto [b2, b4, b6] = b_mod(a, p);
    auto F = [&](u64 x) {
        u64 v = (mulmod(4 % p, x, p) + b2) % p;
        v = (mulmod(v, x, p) + mulmod(2 % p, b4, p)) % p;
        return (mulmod(v, x, p) + b6) % p;
    };
    const auto chi = residue_table(p);
    // Third differences of a cubic are constant.
    u64 f0 = F(0), f1 = F(1 % p), f2 = F(2 % p), f3 = F(3 % p);
    u64 v = f0;
    u64 d1 = subm(f1, f0, p);
    u64 d2 = subm(addm(f2, f0, p), addm(f1, f1, p), p);
    u64 d3 = subm(addm(f3, mulmod(3 % p, f1, p), p), addm(mulmod(3 % p, f2, p), f0, p), p);
    long long s = 0;
    for (u64 x = 0; x < p; ++x) {
        s += chi[v];
        v = addm(v, d1, p);
        d1 = addm(d1, d2, p);
        d2 = addm(d2, d3, p);
    }
    return static_cast<u64>(static_cast<long long>(p) + 1 + s);
}

namespace {

void check_count_prime(u64 p) {
    if (p < 2 || !is_prime(Int(std::to_string(p)))) throw InputError(std::to_string(p) + " is not prime");
    if (p > count_ceiling())
        throw ResourceError("prime " + std::to_string(p) + " exceeds the counting ceiling " +
                            std::to_string(count_ceiling()));
}

Int to_int(u64 v) {
    Int r;
    mpz_import(r.get_mpz_t(), 1, -1, sizeof(v), 0, 0, &v);
    return r;
}

}  // namespace

std::array<u64, 5> reduced_model(const Curve& c, u64 p, bool& good) {
    std::array<u64, 5> r{};
    if (mpz_divisible_ui_p(c.integral_discriminant().get_mpz_t(), p) == 0) {
        good = true;
        for (int i = 0; i < 5; ++i) r[i] = mod_u64(c.integral_model()[i], p);
        return r;
    }
    LocalData ld = local_data(c, to_int(p));
    good = ld.type == ReductionType::Good;
    for (int i = 0; i < 5; ++i) r[i] = mod_u64(ld.minimal_model[i], p);
    return r;
}

PointCount count_points_fp(const Curve& c, u64 p) {
    check_count_prime(p);
    PointCount pc;
    pc.p = p;
    pc.n = 1;
    bool good = true;
    auto r = reduced_model(c, p, good);
    u64 N = count_points_mod_p(r, p);
    pc.N = to_int(N);
    pc.good = good;
    if (good) {
        Int a = to_int(p) + 1 - pc.N;
        if (a * a > 4 * to_int(p)) throw std::logic_error("point count violates the Hasse bound");
        pc.a = a;
    }
    return pc;
}

PointCount count_extension(const Int& a, u64 p, unsigned n) {
    if (n < 1) throw InputError("extension degree must be >= 1");
    Int P = to_int(p);
    if (a * a > 4 * P) throw InputError("trace " + to_string(a) + " violates the Hasse bound at p = " + std::to_string(p));
    Int prev = 2, cur = a;
    for (unsigned k = 1; k < n; ++k) {
        Int next = a * cur - P * prev;
        prev = cur;
        cur = next;
    }
    Int pn;
    mpz_pow_ui(pn.get_mpz_t(), P.get_mpz_t(), n);
    PointCount pc;
    pc.p = p;
    pc.n = n;
    pc.N = pn + 1 - cur;
    pc.a = cur;
    return pc;
}

Int closed_form_extension_count(const Int& N1, u64 p, unsigned n) {
    Int P = to_int(p);
    Int Nd = 2 * P + 2 - N1;
    switch (n) {
        case 1: return N1;
        case 2: return N1 * Nd;
        case 3: return N1 * (P * P - P + 1 + (P + 1) * Nd - N1 * Nd);
        default: throw InputError("closed form available for n = 1, 2, 3 only");
    }
}

u64 least_nonresidue(u64 p) {
    if (p < 3 || p % 2 == 0) throw InputError("least_nonresidue needs an odd prime");
    for (u64 r = 2;; ++r)
        if (legendre_u64(r, p) == -1) return r;
}

Int count_fp2_direct(const Curve& c, u64 p) {
    if (p < 3 || p > 200 || p % 2 == 0 || !is_prime(to_int(p)))
        throw InputError("count_fp2_direct needs an odd prime p <= 200");
    bool good = true;
    auto a = reduced_model(c, p, good);
    auto [b2, b4, b6] = b_mod(a, p);
    const u64 r = least_nonresidue(p);
    // Elements x0 + x1 s of F_p[s]/(s^2 - r), indexed x0 + p x1.
    struct E2 {
        u64 x0, x1;
    };
    auto mul = [&](E2 u, E2 v) {
        return E2{(u.x0 * v.x0 + r * (u.x1 * v.x1 % p)) % p, (u.x0 * v.x1 + u.x1 * v.x0) % p};
    };
    auto add = [&](E2 u, E2 v) { return E2{(u.x0 + v.x0) % p, (u.x1 + v.x1) % p}; };
    auto scal = [&](u64 k, E2 u) { return E2{k * u.x0 % p, k * u.x1 % p}; };
    std::vector<char> square(p * p, 0);
    for (u64 x1 = 0; x1 < p; ++x1)
        for (u64 x0 = 0; x0 < p; ++x0) {
            E2 z = mul({x0, x1}, {x0, x1});
            square[z.x0 + p * z.x1] = 1;
        }
    Int count = 1;
    for (u64 x1 = 0; x1 < p; ++x1)
        for (u64 x0 = 0; x0 < p; ++x0) {
            E2 x{x0, x1};
            E2 x2 = mul(x, x);
            E2 g = add(add(scal(4, mul(x2, x)), scal(b2, x2)), add(scal(2 * b4 % p, x), E2{b6, 0}));
            if (g.x0 == 0 && g.x1 == 0)
                count += 1;
            else if (square[g.x0 + p * g.x1])
                count += 2;
        }
    return count;
}

u64 count_twist_fp(const Curve& c, u64 p, u64 r) {
    check_count_prime(p);
    if (p == 2) throw InputError("count_twist_fp needs an odd prime");
    r %= p;
    if (r == 0) throw InputError("twist parameter must be a unit mod p");
    bool good = true;
    auto a = reduced_model(c, p, good);
    auto [b2, b4, b6] = b_mod(a, p);
    // Y^2 = 4X^3 + b2 r X^2 + 2 b4 r^2 X + b6 r^3
    u64 r2 = mulmod(r, r, p), r3 = mulmod(r2, r, p);
    u64 c2 = mulmod(b2, r, p), c1 = mulmod(mulmod(2, b4, p), r2, p), c0 = mulmod(b6, r3, p);
    std::vector<unsigned char> roots(p, 0);
    for (u64 y = 0; y < p; ++y) ++roots[mulmod(y, y, p)];
    u64 n = 1;
    for (u64 X = 0; X < p; ++X) {
        u64 v = (mulmod(4, X, p) + c2) % p;
        v = (mulmod(v, X, p) + c1) % p;
        v = (mulmod(v, X, p) + c0) % p;
        n += roots[v];
    }
    return n;
}

bool twist_count_identity_check(const Curve& c, u64 p) {
    if (p == 2) throw InputError("twist identity needs an odd prime");
    PointCount pc = count_points_fp(c, p);
    if (!pc.good) throw InputError("twist identity needs good reduction at p = " + std::to_string(p));
    Int Nt = to_int(count_twist_fp(c, p, least_nonresidue(p)));
    return Nt == 2 * to_int(p) + 2 - pc.N;
}

QuadraticPrimeSplitting splitting(const Int& d, u64 p) {
    if (d == 0 || d == 1 || !is_squarefree(d)) throw InputError("d = " + to_string(d) + " must be squarefree, not 0 or 1");
    if (p < 2 || !is_prime(to_int(p))) throw InputError(std::to_string(p) + " is not prime");
    QuadraticPrimeSplitting s;
    s.p = p;
    s.d = d;
    auto set = [&](QuadraticPrimeSplitting::Kind k) {
        s.kind = k;
        s.e = k == QuadraticPrimeSplitting::Kind::ramified ? 2 : 1;
        s.f = k == QuadraticPrimeSplitting::Kind::inert ? 2 : 1;
        return s;
    };
    if (p == 2) {
        u64 d8 = mod_u64(d, 8);
        if (d8 % 4 != 1) return set(QuadraticPrimeSplitting::Kind::ramified);
        return set(d8 == 1 ? QuadraticPrimeSplitting::Kind::split : QuadraticPrimeSplitting::Kind::inert);
    }
    int l = legendre_u64(mod_u64(d, p), p);
    if (l == 0) return set(QuadraticPrimeSplitting::Kind::ramified);
    return set(l == 1 ? QuadraticPrimeSplitting::Kind::split : QuadraticPrimeSplitting::Kind::inert);
}

Int count_at_quadratic_prime(const Curve& c, const Int& d, u64 p) {
    auto s = splitting(d, p);
    if (p == 2 || s.kind == QuadraticPrimeSplitting::Kind::ramified)
        throw UnsupportedPrimeError("prime " + std::to_string(p) + " is 2 or ramified in Q(sqrt " + to_string(d) + ")");
    PointCount pc = count_points_fp(c, p);
    if (!pc.good) throw InputError("bad reduction at p = " + std::to_string(p));
    if (s.kind == QuadraticPrimeSplitting::Kind::split) return pc.N;
    return count_extension(*pc.a, p, 2).N;
}

namespace {

// F_p[s]/(s^2 - r)
struct Fp2 {
    u64 p, r;
    struct E {
        u64 x0, x1;
    };
    E add(E u, E v) const { return {addm(u.x0, v.x0, p), addm(u.x1, v.x1, p)}; }
    E sub(E u, E v) const { return {subm(u.x0, v.x0, p), subm(u.x1, v.x1, p)}; }
    E mul(E u, E v) const {
        return {addm(mulmod(u.x0, v.x0, p), mulmod(r, mulmod(u.x1, v.x1, p), p), p),
                addm(mulmod(u.x0, v.x1, p), mulmod(u.x1, v.x0, p), p)};
    }
    E sc(u64 k, E u) const { return {mulmod(k % p, u.x0, p), mulmod(k % p, u.x1, p)}; }
    u64 norm(E u) const { return subm(mulmod(u.x0, u.x0, p), mulmod(r, mulmod(u.x1, u.x1, p), p), p); }
};

// p^2 + 1 + sum over x of chi(N(g(x))) for a cubic g = c3 x^3 + c2 x^2 + c1 x + c0 over F_{p^2}.
Int count_cubic_fp2(const Fp2& F, const std::array<Fp2::E, 4>& g) {
    const u64 p = F.p;
    const auto chi = residue_table(p);
    auto eval = [&](Fp2::E x) {
        Fp2::E v = g[3];
        for (int i = 2; i >= 0; --i) v = F.add(F.mul(v, x), g[i]);
        return v;
    };
    long long s = 0;
    for (u64 x1 = 0; x1 < p; ++x1) {
        Fp2::E g0 = eval({0, x1}), g1 = eval({1 % p, x1}), g2 = eval({2 % p, x1}), g3 = eval({3 % p, x1});
        Fp2::E v = g0;
        Fp2::E d1 = F.sub(g1, g0);
        Fp2::E d2 = F.sub(F.add(g2, g0), F.add(g1, g1));
        Fp2::E d3 = F.sub(F.add(g3, F.sc(3, g1)), F.add(F.sc(3, g2), g0));
        for (u64 x0 = 0; x0 < p; ++x0) {
            s += chi[F.norm(v)];
            v = F.add(v, d1);
            d1 = F.add(d1, d2);
            d2 = F.add(d2, d3);
        }
    }
    Int P = to_int(p);
    return P * P + 1 + Int(std::to_string(s));
}

}  // namespace

Int count_short_fp2(u64 A0, u64 A1, u64 B0, u64 B1, u64 r, u64 p) {
    if (p < 3 || p % 2 == 0) throw InputError("count_short_fp2 needs an odd prime");
    if (legendre_u64(r % p, p) != -1) throw InputError("s^2 = r needs a non-residue r");
    Fp2 F{p, r % p};
    return count_cubic_fp2(F, {Fp2::E{B0 % p, B1 % p}, Fp2::E{A0 % p, A1 % p}, Fp2::E{0, 0}, Fp2::E{1, 0}});
}

namespace {

// Image of (U + V sqrt d)/2 in Z_p (split, sqrt d -> rho) or Z_p[s] (inert), modulo p^K.
struct LocalElt {
    Int x0, x1;  // x1 = 0 in the split case
};

long capped_val(const LocalElt& e, const Int& p, long K) {
    long v0 = e.x0 == 0 ? K : std::min(K, vp(e.x0, p));
    long v1 = e.x1 == 0 ? K : std::min(K, vp(e.x1, p));
    return std::min(v0, v1);
}

}  // namespace

QuadraticPrimeCounts count_curveK_at_prime(const CurveK& c, u64 p) {
    auto sp = splitting(c.d, p);
    if (p == 2 || sp.kind == QuadraticPrimeSplitting::Kind::ramified)
        throw UnsupportedPrimeError("prime " + std::to_string(p) + " is 2 or ramified in Q(sqrt " + to_string(c.d) + ")");
    check_count_prime(p);
    const bool split = sp.kind == QuadraticPrimeSplitting::Kind::split;
    QuadraticPrimeCounts out;
    out.p = p;
    out.kind = sp.kind;
    const Int P = to_int(p);
    const u64 dmod = mod_u64(c.d, p);

    if (p == 3) {
        // Reduce the given model directly.
        const Int inv2 = 2;  // 2^{-1} = 2 mod 3
        auto fill = [&](auto&& image) {
            std::array<u64, 5> red{};
            std::array<Fp2::E, 5> redK{};
            for (int i = 0; i < 5; ++i) image(c.a[i], red[i], redK[i]);
            return std::pair{red, redK};
        };
        if (split) {
            u64 rho = *sqrt_mod_u64(dmod, p);
            for (u64 root : {rho, (p - rho) % p}) {
                auto [red, unused] = fill([&](const QuadInt& q, u64& o, Fp2::E&) {
                    o = mod_u64(Int((q.twice_rational() + q.twice_irrational() * Int(std::to_string(root))) * inv2), p);
                });
                (void)unused;
                auto W = weierstrass_quantities<Int>(to_int(red[0]), to_int(red[1]), to_int(red[2]), to_int(red[3]),
                                                     to_int(red[4]));
                if (mod_u64(W.disc, p) == 0) {
                    out.bad = true;
                    out.counts.clear();
                    return out;
                }
                out.counts.push_back(to_int(count_points_mod_p(red, p)));
            }
            return out;
        }
        Fp2 F{p, dmod};
        auto [unused, rk] = fill([&](const QuadInt& q, u64&, Fp2::E& o) {
            o = {mod_u64(Int(q.twice_rational() * inv2), p), mod_u64(Int(q.twice_irrational() * inv2), p)};
        });
        (void)unused;
        auto &a1 = rk[0], &a2 = rk[1], &a3 = rk[2], &a4 = rk[3], &a6 = rk[4];
        Fp2::E b2 = F.add(F.mul(a1, a1), F.sc(4, a2));
        Fp2::E b4 = F.add(F.sc(2, a4), F.mul(a1, a3));
        Fp2::E b6 = F.add(F.mul(a3, a3), F.sc(4, a6));
        Fp2::E b8 = F.sub(F.add(F.add(F.mul(F.mul(a1, a1), a6), F.sc(4, F.mul(a2, a6))), F.mul(a2, F.mul(a3, a3))),
                          F.add(F.mul(a1, F.mul(a3, a4)), F.mul(a4, a4)));
        // disc = -b2^2 b8 - 8 b4^3 - 27 b6^2 + 9 b2 b4 b6; mod 3 only the first two terms survive
        Fp2::E disc = F.sub(F.sub(Fp2::E{0, 0}, F.mul(F.mul(b2, b2), b8)), F.sc(8, F.mul(F.mul(b4, b4), b4)));
        if (disc.x0 == 0 && disc.x1 == 0) {
            out.bad = true;
            return out;
        }
        out.counts.push_back(count_cubic_fp2(F, {b6, F.sc(2, b4), b2, Fp2::E{4 % p, 0}}));
        return out;
    }

    // p >= 5: minimize (c4, c6) locally and count on y^2 = x^3 - 27 c4' x - 54 c6'.
    InvariantsK ik = invariants_K(c);
    const long K = vp(ik.disc.norm(), P) + 2;
    Int pK;
    mpz_pow_ui(pK.get_mpz_t(), P.get_mpz_t(), static_cast<unsigned long>(K));
    const Int inv2 = inv(Int(2), pK);

    auto images = [&](const Int& rho) {
        auto img = [&](const QuadInt& q) -> LocalElt {
            if (split) return {mod((q.twice_rational() + q.twice_irrational() * rho) * inv2, pK), Int(0)};
            return {mod(q.twice_rational() * inv2, pK), mod(q.twice_irrational() * inv2, pK)};
        };
        return std::array<LocalElt, 3>{img(ik.c4), img(ik.c6), img(ik.disc)};
    };

    auto count_one = [&](const Int& rho) -> std::optional<Int> {
        auto [c4, c6, D] = images(rho);
        long v4 = capped_val(c4, P, K), v6 = capped_val(c6, P, K), vD = capped_val(D, P, K);
        long k = std::min({v4 / 4, v6 / 6, vD / 12});
        if (vD - 12 * k != 0) return std::nullopt;
        Int p4k, p6k;
        mpz_pow_ui(p4k.get_mpz_t(), P.get_mpz_t(), static_cast<unsigned long>(4 * k));
        mpz_pow_ui(p6k.get_mpz_t(), P.get_mpz_t(), static_cast<unsigned long>(6 * k));
        auto red = [&](const Int& x, const Int& pw) { return mod_u64(exact_div(x, pw), p); };
        u64 A0 = mulmod(p - 27 % p, red(c4.x0, p4k), p), A1 = mulmod(p - 27 % p, red(c4.x1, p4k), p);
        u64 B0 = mulmod(p - 54 % p, red(c6.x0, p6k), p), B1 = mulmod(p - 54 % p, red(c6.x1, p6k), p);
        if (split) return to_int(count_points_mod_p({0, 0, 0, A0, B0}, p));
        return count_short_fp2(A0, A1, B0, B1, dmod, p);
    };

    if (split) {
        u64 r0 = *sqrt_mod_u64(dmod, p);
        r0 = std::min(r0, p - r0);
        for (u64 r : {r0, p - r0}) {
            Int rho = to_int(r);
            for (long prec = 1; prec < K; prec *= 2) rho = mod(rho - (rho * rho - c.d) * inv(Int(2 * rho), pK), pK);
            auto n = count_one(rho);
            if (!n) {
                out.bad = true;
                out.counts.clear();
                return out;
            }
            out.counts.push_back(*n);
        }
        return out;
    }
    auto n = count_one(Int(0));
    if (!n) {
        out.bad = true;
        return out;
    }
    out.counts.push_back(*n);
    return out;
}

}  // namespace ecred

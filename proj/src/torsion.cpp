#include "ecred/torsion.hpp"

#include "ecred/errors.hpp"
#include "ecred/reduction.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <stdexcept>

namespace ecred {

namespace {

using RPoly = Polynomial<Rat>;

// f_k = psi_k (k odd), psi_k / psi_2 (k even), and F = psi_2^2.
template <class T, class Mul, class Sub>
std::vector<T> division_table(long m, const T& f3, const T& f4, const T& F2, const T& zero, const T& one, Mul mul,
                              Sub sub) {
    std::vector<T> f(std::max<long>(m + 1, 5), zero);
    f[1] = one;
    f[2] = one;
    f[3] = f3;
    f[4] = f4;
    auto cube = [&](const T& v) { return mul(mul(v, v), v); };
    auto sq = [&](const T& v) { return mul(v, v); };
    for (long k = 5; k <= m; ++k) {
        long n = k / 2;
        if (k % 2) {
            if (n % 2 == 0)
                f[k] = sub(mul(F2, mul(f[n + 2], cube(f[n]))), mul(f[n - 1], cube(f[n + 1])));
            else
                f[k] = sub(mul(f[n + 2], cube(f[n])), mul(F2, mul(f[n - 1], cube(f[n + 1]))));
        } else {
            f[k] = mul(f[n], sub(mul(f[n + 2], sq(f[n - 1])), mul(f[n - 2], sq(f[n + 1]))));
        }
    }
    return f;
}

struct Base {
    RPoly F, f3, f4;
};

Base base_polys(const Curve& c) {
    const auto& q = c.invariants();
    Rat b2 = q.b2, b4 = q.b4, b6 = q.b6, b8 = q.b8;
    RPoly F{b6, 2 * b4, b2, Rat(4)};
    RPoly f3{b8, 3 * b6, 3 * b4, b2, Rat(3)};
    RPoly f4{Rat(b4 * b8 - b6 * b6), Rat(b2 * b8 - b4 * b6), 10 * b8, 10 * b6, 5 * b4, b2, Rat(2)};
    return {F, f3, f4};
}

std::vector<RPoly> poly_table(const Curve& c, long m) {
    if (m < 1) throw InputError("division polynomial index must be >= 1");
    if (m > kMaxDivisionIndex)
        throw ResourceError("division polynomial index " + std::to_string(m) + " exceeds the guard " +
                            std::to_string(kMaxDivisionIndex));
    Base b = base_polys(c);
    RPoly F2 = b.F * b.F;
    return division_table<RPoly>(
        m, b.f3, b.f4, F2, RPoly{}, RPoly::constant(Rat(1)), [](const RPoly& x, const RPoly& y) { return x * y; },
        [](const RPoly& x, const RPoly& y) { return x - y; });
}

}  // namespace

DivisionPolynomial division_polynomial(const Curve& c, long m) {
    auto f = poly_table(c, m);
    DivisionPolynomial out;
    out.m = m;
    if (m % 2) {
        out.poly = f[m];
    } else {
        out.poly = f[m] * f[m] * base_polys(c).F;
        out.squared = true;
    }
    return out;
}

Polynomial<Rat> torsion_x_polynomial(const Curve& c, long m) {
    if (m < 2) throw InputError("torsion_x_polynomial needs m >= 2");
    auto f = poly_table(c, m);
    if (m % 2) return f[m];
    return f[m] * base_polys(c).F;
}

u64 division_value_mod_p(const std::array<u64, 5>& a, u64 x, long m, u64 p) {
    if (m < 1) throw InputError("division polynomial index must be >= 1");
    auto md = [p](u64 v) { return v % p; };
    u64 a1 = md(a[0]), a2 = md(a[1]), a3 = md(a[2]), a4 = md(a[3]), a6 = md(a[4]);
    auto mul = [p](u64 u, u64 v) { return mulmod(u, v, p); };
    auto add = [p](u64 u, u64 v) { return (u + v) % p; };
    auto sub = [p](u64 u, u64 v) { return (u + p - v) % p; };
    u64 b2 = add(mul(a1, a1), mul(4 % p, a2));
    u64 b4 = add(mul(2 % p, a4), mul(a1, a3));
    u64 b6 = add(mul(a3, a3), mul(4 % p, a6));
    u64 b8 = sub(add(add(mul(mul(a1, a1), a6), mul(4 % p, mul(a2, a6))), mul(a2, mul(a3, a3))),
                 add(mul(a1, mul(a3, a4)), mul(a4, a4)));
    x %= p;
    auto horner = [&](std::initializer_list<u64> coeffs_desc) {
        u64 v = 0;
        for (u64 co : coeffs_desc) v = add(mul(v, x), co % p);
        return v;
    };
    u64 F = horner({4, b2, mul(2, b4), b6});
    u64 f3 = horner({3, b2, mul(3, b4), mul(3, b6), b8});
    u64 f4 = horner({2, b2, mul(5, b4), mul(10, b6), mul(10, b8), sub(mul(b2, b8), mul(b4, b6)),
                     sub(mul(b4, b8), mul(b6, b6))});
    auto f = division_table<u64>(m, f3, f4, mul(F, F), 0, 1 % p, mul, sub);
    return f[m];
}

bool FpCurve::contains(u64 x, u64 y) const {
    if (x >= p || y >= p) return false;
    u64 lhs = (mulmod(y, y, p) + mulmod(mulmod(a[0], x, p), y, p) + mulmod(a[2], y, p)) % p;
    u64 x2 = mulmod(x, x, p);
    u64 rhs = (mulmod(x2, x, p) + mulmod(a[1], x2, p) + mulmod(a[3], x, p) + a[4]) % p;
    return lhs == rhs;
}

FpCurve reduce_curve(const Curve& c, u64 p) {
    if (p < 2 || !is_prime(Int(std::to_string(p)))) throw InputError(std::to_string(p) + " is not prime");
    bool good = true;
    auto r = reduced_model(c, p, good);
    if (!good) throw InputError("bad reduction at p = " + std::to_string(p));
    return {p, r};
}

namespace {

void require_on_curve(const FpCurve& E, const FpPoint& P) {
    if (!P.infinity && !E.contains(P.x, P.y))
        throw InputError("point (" + std::to_string(P.x) + ", " + std::to_string(P.y) + ") is not on the curve mod " +
                         std::to_string(E.p));
}

FpPoint add_unchecked(const FpCurve& E, const FpPoint& P, const FpPoint& Q) {
    if (P.infinity) return Q;
    if (Q.infinity) return P;
    const u64 p = E.p;
    const auto& a = E.a;
    auto sub = [p](u64 u, u64 v) { return (u + p - v % p) % p; };
    u64 lambda;
    if (P.x != Q.x) {
        lambda = mulmod(sub(Q.y, P.y), invmod(sub(Q.x, P.x), p), p);
    } else {
        // Q = -P when y_Q = -y_P - a1 x - a3
        u64 den = (2 * P.y % p + mulmod(a[0], P.x, p) + a[2]) % p;
        if (Q.y != P.y || den == 0) return FpPoint::at_infinity();
        u64 num = (3 * mulmod(P.x, P.x, p) % p + mulmod(2 * a[1] % p, P.x, p) + a[3]) % p;
        num = sub(num, mulmod(a[0], P.y, p));
        lambda = mulmod(num, invmod(den, p), p);
    }
    u64 nu = sub(P.y, mulmod(lambda, P.x, p));
    u64 x3 = sub(sub(sub((mulmod(lambda, lambda, p) + mulmod(a[0], lambda, p)) % p, a[1]), P.x), Q.x);
    u64 y3 = sub(sub(p - mulmod((lambda + a[0]) % p, x3, p), nu), a[2]);
    return FpPoint::affine(x3, y3 % p);
}

FpPoint mul_unchecked(const FpCurve& E, Int n, FpPoint P) {
    if (n < 0) {
        n = -n;
        P = ec_neg(E, P);
    }
    FpPoint R = FpPoint::at_infinity();
    while (n > 0) {
        if (mpz_odd_p(n.get_mpz_t())) R = add_unchecked(E, R, P);
        P = add_unchecked(E, P, P);
        n >>= 1;
    }
    return R;
}

}  // namespace

FpPoint ec_neg(const FpCurve& E, const FpPoint& P) {
    require_on_curve(E, P);
    if (P.infinity) return P;
    const u64 p = E.p;
    u64 t = (P.y + mulmod(E.a[0], P.x, p) + E.a[2]) % p;
    return FpPoint::affine(P.x, (p - t) % p);
}

FpPoint ec_add(const FpCurve& E, const FpPoint& P, const FpPoint& Q) {
    require_on_curve(E, P);
    require_on_curve(E, Q);
    return add_unchecked(E, P, Q);
}

FpPoint ec_mul(const FpCurve& E, const Int& n, const FpPoint& P) {
    require_on_curve(E, P);
    return mul_unchecked(E, n, P);
}

Int point_order(const FpCurve& E, const FpPoint& P) {
    require_on_curve(E, P);
    u64 N = count_points_mod_p(E.a, E.p);
    u64 order = N;
    for (auto [q, e] : factor_u64(N)) {
        for (int i = 0; i < e; ++i) {
            if (mul_unchecked(E, Int(std::to_string(order / q)), P).infinity)
                order /= q;
            else
                break;
        }
    }
    return Int(std::to_string(order));
}

std::vector<FpPoint> enumerate_points(const FpCurve& E) {
    std::vector<FpPoint> pts;
    for (u64 x = 0; x < E.p; ++x)
        for (u64 y = 0; y < E.p; ++y)
            if (E.contains(x, y)) pts.push_back(FpPoint::affine(x, y));
    return pts;
}

std::string TorsionGroup::str() const {
    if (n1 * n2 == 1) return "0";
    if (n1 == 1) return "Z/" + std::to_string(n2);
    return "Z/" + std::to_string(n1) + " x Z/" + std::to_string(n2);
}

TorsionGroup parse_torsion_structure(const std::string& s) {
    static const std::regex trivial(R"(\s*(0|\{0\}|trivial)\s*)");
    static const std::regex cyclic(R"(\s*Z/(\d+)Z?\s*)");
    static const std::regex product(R"(\s*Z/(\d+)Z?\s*(?:x|×|\*)\s*Z/(\d+)Z?\s*)");
    std::smatch m;
    if (std::regex_match(s, trivial)) return {};
    if (std::regex_match(s, m, cyclic)) return {1, std::stol(m[1]), {}};
    if (std::regex_match(s, m, product)) {
        long a = std::stol(m[1]), b = std::stol(m[2]);
        if (a > b) std::swap(a, b);
        if (b % a) throw InputError("torsion structure '" + s + "': n1 must divide n2");
        return {a, b, {}};
    }
    throw InputError("cannot parse torsion structure '" + s + "'");
}

Int torsion_reduction_bound(const Curve& c, int count) {
    Int g = 0;
    int used = 0;
    for (u64 lo = 3; used < count; lo += 1000) {
        for (u64 p : primes_in_range(lo, lo + 999)) {
            auto pc = count_points_fp(c, p);
            if (!pc.good) continue;
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), pc.N.get_mpz_t());
            if (++used == count) break;
        }
    }
    return g;
}

namespace {

// Points on Y^2 = X^3 + A X + B over Q.
struct ShortQ {
    Int A, B;
};

struct QPoint {
    bool inf = true;
    Rat x, y;
};

QPoint add_q(const ShortQ& E, const QPoint& P, const QPoint& Q) {
    if (P.inf) return Q;
    if (Q.inf) return P;
    Rat lambda;
    if (P.x != Q.x) {
        lambda = (Q.y - P.y) / (Q.x - P.x);
    } else {
        if (P.y != Q.y || P.y == 0) return {};
        lambda = (3 * P.x * P.x + Rat(E.A)) / (2 * P.y);
    }
    QPoint R;
    R.inf = false;
    R.x = lambda * lambda - P.x - Q.x;
    R.y = lambda * (P.x - R.x) - P.y;
    return R;
}

bool integral(const QPoint& P) { return P.inf || (P.x.get_den() == 1 && P.y.get_den() == 1); }

// Order (<= 12) of a point with integer coordinates, or 0 when it has infinite order.
long torsion_order(const ShortQ& E, const QPoint& P) {
    QPoint R = P;
    for (long n = 1; n <= 12; ++n) {
        if (R.inf) return n;
        if (!integral(R)) return 0;
        R = add_q(E, R, P);
    }
    return 0;
}

Int cubic_value(const Int& x, const Int& A, const Int& C) { return (x * x + A) * x + C; }

// Integer roots of x^3 + A x + C, ascending.
std::vector<Int> integer_roots(const Int& A, const Int& C) {
    Int bound = 1 + std::max(Int(abs(A)), Int(abs(C)));
    Int s = 0;
    if (A < 0) {
        Int q = -A / 3;
        mpz_sqrt(s.get_mpz_t(), q.get_mpz_t());
        s += 1;
    }
    std::vector<std::pair<Int, Int>> intervals;
    if (A < 0) {
        intervals = {{-bound, -s}, {-s + 1, s - 1}, {s, bound}};
    } else {
        intervals = {{-bound, bound}};
    }
    std::vector<Int> roots;
    for (auto [lo, hi] : intervals) {
        if (lo > hi) continue;
        Int flo = cubic_value(lo, A, C), fhi = cubic_value(hi, A, C);
        if (flo == 0) roots.push_back(lo);
        if (fhi == 0 && hi != lo) roots.push_back(hi);
        if (sgn(flo) * sgn(fhi) >= 0) continue;
        bool increasing = flo < fhi;
        while (hi - lo > 1) {
            Int mid = (lo + hi) / 2;
            Int fm = cubic_value(mid, A, C);
            if (fm == 0) {
                roots.push_back(mid);
                break;
            }
            if ((fm < 0) == increasing)
                lo = mid;
            else
                hi = mid;
        }
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
}

// Divisors y > 0 of n with y^2 | n, given the factorization of n.
std::vector<Int> square_divisor_roots(const std::vector<std::pair<Int, int>>& fac) {
    std::vector<Int> ys{Int(1)};
    for (const auto& [q, e] : fac) {
        std::vector<Int> next;
        for (const auto& y : ys) {
            Int pw = 1;
            for (int k = 0; 2 * k <= e; ++k) {
                next.push_back(y * pw);
                pw *= q;
            }
        }
        ys.swap(next);
    }
    return ys;
}

}  // namespace

TorsionGroup torsion_over_Q(const Curve& c) {
    const auto& a = c.integral_model();
    auto q = weierstrass_quantities(a[0], a[1], a[2], a[3], a[4]);
    ShortQ E{Int(-27 * q.c4), Int(-54 * q.c6)};
    // disc(X^3 + A X + B) = -(4A^3 + 27B^2) = 2^8 3^12 Delta
    Factorization fd = factor(abs(q.disc));
    std::map<Int, int> exps;
    for (const auto& [pr, e] : fd.factors) exps[pr] += e;
    exps[Int(2)] += 8;
    exps[Int(3)] += 12;
    std::vector<std::pair<Int, int>> fac(exps.begin(), exps.end());

    std::vector<std::pair<QPoint, long>> torsion;  // affine torsion points with orders
    auto consider = [&](const Int& y) {
        for (const Int& x : integer_roots(E.A, Int(E.B - y * y))) {
            for (int sign : {1, -1}) {
                if (y == 0 && sign < 0) continue;
                QPoint P{false, Rat(x), Rat(sign * y)};
                long n = torsion_order(E, P);
                if (n) torsion.push_back({P, n});
            }
        }
    };
    consider(Int(0));
    for (const Int& y : square_divisor_roots(fac)) consider(y);

    long total = 1 + static_cast<long>(torsion.size());
    long two_torsion = 1;
    for (const auto& [P, n] : torsion)
        if (n == 2) ++two_torsion;
    TorsionGroup G;
    G.n1 = two_torsion == 4 ? 2 : 1;
    G.n2 = total / G.n1;
    if (G.n1 * G.n2 != total) throw std::logic_error("torsion: inconsistent point count");

    Int bound = torsion_reduction_bound(c);
    if (bound % total != 0) throw std::logic_error("torsion: order does not divide the reduction bound");

    // Map a point on the short model back to the input model.
    const Int& u = c.integral_scale();
    auto back = [&](const QPoint& P) -> RationalPoint {
        Rat xi = (P.x - 3 * Rat(q.b2)) / 36;
        Rat yi = (P.y / 108 - Rat(a[0]) * xi - Rat(a[2])) / 2;
        Rat u2 = Rat(u * u);
        return {Rat(xi / u2), Rat(yi / (u2 * Rat(u)))};
    };
    const QPoint* gen = nullptr;
    for (const auto& [P, n] : torsion)
        if (n == G.n2) {
            gen = &P;
            break;
        }
    if (gen) {
        G.generators.push_back(back(*gen));
        if (G.n1 == 2) {
            // a 2-torsion point outside the cyclic subgroup generated by gen
            QPoint half = *gen;
            for (long k = 1; k < G.n2 / 2; ++k) half = add_q(E, half, *gen);
            for (const auto& [P, n] : torsion)
                if (n == 2 && (half.inf || P.x != half.x)) {
                    G.generators.push_back(back(P));
                    break;
                }
        }
    }
    return G;
}

Int odd_part(Int n) {
    n = abs(n);
    if (n == 0) return 0;
    mpz_remove(n.get_mpz_t(), n.get_mpz_t(), Int(2).get_mpz_t());
    return n;
}

Int odd_torsion_over_quadratic(const Curve& c, const Int& d) {
    if (d == 0 || d == 1 || !is_squarefree(d)) throw InputError("d = " + to_string(d) + " must be squarefree, not 0 or 1");
    Int a = odd_part(Int(torsion_over_Q(c).order()));
    Int b = odd_part(Int(torsion_over_Q(quadratic_twist(c, d)).order()));
    return a * b;
}

Int quadratic_torsion_bound(const Curve& c, const Int& d, u64 X) {
    if (X < 100) throw InputError("quadratic_torsion_bound needs X >= 100");
    Int g = 0;
    for (u64 p : primes_in_range(3, X)) {
        if (mod_u64(d, p) == 0) continue;
        bool good = true;
        reduced_model(c, p, good);
        if (!good) continue;
        Int n = count_at_quadratic_prime(c, d, p);
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
    }
    return g;
}

const TorsionCatalog& torsion_catalog() {
    static const TorsionCatalog cat{
        {2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 14, 16},
        {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 18, 20, 24},
        {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 15, 18, 20, 21, 24, 28},
    };
    return cat;
}

bool admissible(long m, int degree) {
    if (m < 2) throw InputError("admissible: m must be >= 2");
    const auto& c = torsion_catalog();
    switch (degree) {
        case 1: return c.S1.count(m) > 0;
        case 2: return c.S2.count(m) > 0;
        case 3: return c.S3.count(m) > 0;
        default: throw InputError("admissible: degree must be 1, 2 or 3");
    }
}

const std::vector<Phi2Row>& phi2_table() {
    static const std::vector<Phi2Row> rows = [] {
        const std::vector<std::pair<const char*, std::vector<const char*>>> text = {
            {"0", {"0", "Z/3", "Z/5", "Z/7", "Z/9"}},
            {"Z/2", {"Z/2", "Z/4", "Z/6", "Z/8", "Z/10", "Z/12", "Z/16", "Z/2 x Z/2", "Z/2 x Z/6", "Z/2 x Z/10"}},
            {"Z/3", {"Z/3", "Z/15", "Z/3 x Z/3"}},
            {"Z/4", {"Z/4", "Z/8", "Z/12", "Z/2 x Z/4", "Z/2 x Z/8", "Z/2 x Z/12", "Z/4 x Z/4"}},
            {"Z/5", {"Z/5", "Z/15"}},
            {"Z/6", {"Z/6", "Z/12", "Z/2 x Z/6", "Z/3 x Z/6"}},
            {"Z/7", {"Z/7"}},
            {"Z/8", {"Z/8", "Z/16", "Z/2 x Z/8"}},
            {"Z/9", {"Z/9"}},
            {"Z/10", {"Z/10", "Z/2 x Z/10"}},
            {"Z/12", {"Z/12", "Z/2 x Z/12"}},
            {"Z/2 x Z/2", {"Z/2 x Z/2", "Z/2 x Z/4", "Z/2 x Z/6", "Z/2 x Z/8", "Z/2 x Z/12"}},
            {"Z/2 x Z/4", {"Z/2 x Z/4", "Z/2 x Z/8", "Z/4 x Z/4"}},
            {"Z/2 x Z/6", {"Z/2 x Z/6", "Z/2 x Z/12"}},
            {"Z/2 x Z/8", {"Z/2 x Z/8"}},
        };
        std::vector<Phi2Row> out;
        for (const auto& [g, hs] : text) {
            Phi2Row r{parse_torsion_structure(g), {}};
            for (const char* h : hs) r.over_K.push_back(parse_torsion_structure(h));
            out.push_back(std::move(r));
        }
        return out;
    }();
    return rows;
}

bool phi2_contains(const TorsionGroup& G, const TorsionGroup& H) {
    for (const auto& row : phi2_table()) {
        if (!row.over_Q.same_structure(G)) continue;
        for (const auto& h : row.over_K)
            if (h.same_structure(H)) return true;
        return false;
    }
    return false;
}

}  // namespace ecred

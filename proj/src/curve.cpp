#include "ecred/curve.hpp"

#include "ecred/errors.hpp"

#include <sstream>

namespace ecred {

Invariants invariants(const AInvariants& a) {
    Invariants out;
    static_cast<WeierstrassQuantities<Rat>&>(out) = weierstrass_quantities(a[0], a[1], a[2], a[3], a[4]);
    if (out.disc != 0) out.j = Rat(out.c4 * out.c4 * out.c4 / out.disc);
    return out;
}

Invariants invariants(const Curve& c) { return c.invariants(); }

std::string family_name(Family f) {
    switch (f) {
        case Family::kkp: return "kkp";
        case Family::family3: return "family3";
        case Family::family5: return "family5";
        case Family::kubert5: return "kubert5";
        case Family::e1k: return "e1k";
        case Family::e2k: return "e2k";
    }
    return "?";
}

Family parse_family(const std::string& name) {
    for (Family f : {Family::kkp, Family::family3, Family::family5, Family::kubert5, Family::e1k, Family::e2k})
        if (family_name(f) == name) return f;
    throw InputError("unknown family '" + name + "'");
}

std::string FamilyParam::str() const {
    switch (family) {
        case Family::e1k:
        case Family::e2k:
            return family_name(family) + "(k=" + std::to_string(k) + ",eps=" + (eps > 0 ? "+1" : "-1") + ")";
        case Family::kubert5: return "kubert5(lambda=" + to_string(t) + ")";
        default: return family_name(family) + "(t=" + to_string(t) + ")";
    }
}

namespace {

Int lcm_of_denominators(const AInvariants& a) {
    Int l = 1;
    for (const auto& q : a) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
    return l;
}

}  // namespace

Curve::Curve(AInvariants a, std::optional<FamilyParam> family) : a_(std::move(a)), family_(std::move(family)) {
    for (auto& q : a_) q.canonicalize();
    inv_ = ecred::invariants(a_);
    if (inv_.disc == 0) throw SingularModelError("singular model " + render_ainvs(a_) + ": discriminant is zero");
    scale_ = lcm_of_denominators(a_);
    static constexpr int kWeight[5] = {1, 2, 3, 4, 6};
    for (int i = 0; i < 5; ++i) {
        Int ui;
        mpz_pow_ui(ui.get_mpz_t(), scale_.get_mpz_t(), kWeight[i]);
        Rat scaled = a_[i] * Rat(ui);
        integral_[i] = scaled.get_num();
    }
    integral_disc_ = weierstrass_quantities(integral_[0], integral_[1], integral_[2], integral_[3], integral_[4]).disc;
}

Curve Curve::from_ints(long a1, long a2, long a3, long a4, long a6) {
    return Curve({Rat(a1), Rat(a2), Rat(a3), Rat(a4), Rat(a6)});
}

std::string render_ainvs(const AInvariants& a) {
    std::ostringstream os;
    os << '[';
    for (int i = 0; i < 5; ++i) os << (i ? "," : "") << a[i].get_str();
    os << ']';
    return os.str();
}

std::string Curve::str() const { return render_ainvs(a_); }

Curve short_model(const Curve& c) {
    if (c.is_short()) return c;
    const auto& inv = c.invariants();
    return Curve({Rat(0), Rat(0), Rat(0), Rat(-inv.c4 / 48), Rat(-inv.c6 / 864)});
}

Curve quadratic_twist(const Curve& c, const Int& d) {
    if (d == 0) throw InputError("quadratic_twist: d must be nonzero");
    if (!is_squarefree(d)) throw InputError("quadratic_twist: d = " + to_string(d) + " is not squarefree");
    Curve s = short_model(c);
    Rat dq(d);
    return Curve({Rat(0), Rat(0), Rat(0), Rat(s.a4() * dq * dq), Rat(s.a6() * dq * dq * dq)});
}

namespace {

bool is_perfect_power(const Int& n, unsigned k, Int& root) {
    if (n < 0) {
        if (k % 2 == 0) return false;
        Int r;
        Int m = -n;
        bool ok = mpz_root(r.get_mpz_t(), m.get_mpz_t(), k) != 0;
        root = -r;
        return ok;
    }
    return mpz_root(root.get_mpz_t(), n.get_mpz_t(), k) != 0;
}

bool is_rational_power(const Rat& q, unsigned k) {
    Int rn, rd;
    return is_perfect_power(q.get_num(), k, rn) && is_perfect_power(q.get_den(), k, rd);
}

}  // namespace

bool isomorphic_over_Q(const Curve& x, const Curve& y) {
    const auto& ix = x.invariants();
    const auto& iy = y.invariants();
    if (*ix.j != *iy.j) return false;
    if (ix.c4 == 0) return is_rational_power(Rat(iy.c6 / ix.c6), 6);
    if (ix.c6 == 0) return is_rational_power(Rat(iy.c4 / ix.c4), 4);
    // c4' = u^4 c4, c6' = u^6 c6 forces u^2 = (c6' c4)/(c6 c4').
    Rat w = iy.c6 * ix.c4 / (ix.c6 * iy.c4);
    return is_rational_power(w, 2) && iy.c4 == w * w * ix.c4 && iy.c6 == w * w * w * ix.c6;
}

Curve make_family(const FamilyParam& p) {
    const Rat& t = p.t;
    auto build = [&](AInvariants a) {
        try {
            return Curve(std::move(a), p);
        } catch (const SingularModelError&) {
            throw InputError("degenerate parameter " + p.str());
        }
    };
    switch (p.family) {
        case Family::kkp:
            // y^2 = x^3 - (6t+3)x - (3t^2+6t+2)
            return build({Rat(0), Rat(0), Rat(0), Rat(-(6 * t + 3)), Rat(-(3 * t * t + 6 * t + 2))});
        case Family::family3:
            if (t == 0) throw InputError("family3 requires t != 0");
            // y^2 = x^3 - 3(t^2+1)x^2 + 3x - 1
            return build({Rat(0), Rat(-3 * (t * t + 1)), Rat(0), Rat(3), Rat(-1)});
        case Family::family5:
            if (t == 0) throw InputError("family5 requires t != 0");
            // y^2 = x^3 - 7t x^2 + 96 t^2 x + 256 t^3
            return build({Rat(0), Rat(-7 * t), Rat(0), Rat(96 * t * t), Rat(256 * t * t * t)});
        case Family::kubert5: {
            if (t == 0) throw InputError("kubert5 requires lambda != 0");
            // y^2 + (1-l)xy - l y = x^3 - l x^2
            return build({Rat(1 - t), Rat(-t), Rat(-t), Rat(0), Rat(0)});
        }
        case Family::e1k:
        case Family::e2k: {
            if (p.k < 1) throw InputError("k must be >= 1");
            if (p.eps != 1 && p.eps != -1) throw InputError("eps must be +1 or -1");
            Int five_k;
            mpz_ui_pow_ui(five_k.get_mpz_t(), 5, static_cast<unsigned long>(p.k));
            Rat l(p.eps * five_k);
            if (p.family == Family::e1k) return build({Rat(1 - l), Rat(-l), Rat(-l), Rat(0), Rat(0)});
            // y^2 + (eps 5^k - 1)xy - 5^{2k} y = x^3 - eps 5^k x^2
            return build({Rat(l - 1), Rat(-l), Rat(-(five_k * five_k)), Rat(0), Rat(0)});
        }
    }
    throw InputError("unknown family");
}

CurveK CurveK::from_rational(const std::array<Int, 5>& a, const Int& d) {
    CurveK c{d, {QuadInt::integer(a[0], d), QuadInt::integer(a[1], d), QuadInt::integer(a[2], d),
                 QuadInt::integer(a[3], d), QuadInt::integer(a[4], d)}};
    return c;
}

CurveK CurveK::conjugate() const {
    CurveK c = *this;
    for (auto& x : c.a) x = x.conjugate();
    return c;
}

std::string CurveK::str() const {
    std::string s = "[";
    for (int i = 0; i < 5; ++i) s += (i ? ", " : "") + a[i].str();
    return s + "] over Q(sqrt(" + to_string(d) + "))";
}

InvariantsK invariants_K(const CurveK& c) {
    auto q = weierstrass_quantities(c.a[0], c.a[1], c.a[2], c.a[3], c.a[4]);
    if (q.disc.is_zero()) throw SingularModelError("singular model over Q(sqrt d)");
    return {q.disc, q.c4, q.c6};
}

}  // namespace ecred

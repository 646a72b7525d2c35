#include "doctest.h"
#include "ecred/curve.hpp"
#include "ecred/errors.hpp"

using namespace ecred;

TEST_CASE("invariants of 11a1") {
    Curve c = Curve::from_ints(0, -1, 1, -10, -20);
    const auto& inv = c.invariants();
    CHECK(inv.b2 == -4);
    CHECK(inv.c4 == 496);
    CHECK(inv.c6 == 20008);
    CHECK(inv.disc == -161051);
    CHECK(c.j() == make_rat(Int(-122023936), Int(161051)));
    CHECK(c.is_integral());
}

TEST_CASE("singular models are rejected") {
    CHECK_THROWS_AS(Curve::from_ints(0, 0, 0, 0, 0), SingularModelError);
    CHECK_THROWS_AS(Curve::from_ints(0, 0, 0, -3, 2), SingularModelError);
}

TEST_CASE("integral model of a rational curve") {
    Curve c({Rat(0), Rat(0), Rat(0), make_rat(Int(-1), Int(4)), make_rat(Int(1), Int(8))});
    // u = lcm of the denominators = 8
    CHECK(c.integral_scale() == 8);
    CHECK(c.integral_model()[3] == -1024);
    CHECK(c.integral_model()[4] == 32768);
    CHECK(c.integral_discriminant() == c.discriminant() * Rat(Int(1) << 36));
}

TEST_CASE("short model and twists") {
    Curve c = Curve::from_ints(1, -1, 1, -1, -14);  // 17a1
    Curve s = short_model(c);
    CHECK(s.is_short());
    CHECK(s.discriminant() == c.discriminant());
    CHECK(s.j() == c.j());
    CHECK(isomorphic_over_Q(c, s));
    Curve t = quadratic_twist(c, Int(-1));
    CHECK(t.j() == c.j());
    CHECK_FALSE(isomorphic_over_Q(c, t));
    CHECK(isomorphic_over_Q(quadratic_twist(t, Int(-1)), c));
    CHECK(isomorphic_over_Q(quadratic_twist(c, Int(5)), quadratic_twist(quadratic_twist(c, Int(-3)), Int(-15))));
    CHECK_THROWS_AS(quadratic_twist(c, Int(12)), InputError);
    CHECK_FALSE(isomorphic_over_Q(c, Curve::from_ints(0, -1, 1, -10, -20)));
}

TEST_CASE("isomorphism with j = 0 and j = 1728") {
    Curve a = Curve::from_ints(0, 0, 0, 0, 1);
    CHECK(isomorphic_over_Q(a, Curve::from_ints(0, 0, 0, 0, 64)));
    CHECK_FALSE(isomorphic_over_Q(a, Curve::from_ints(0, 0, 0, 0, 4)));
    Curve b = Curve::from_ints(0, 0, 0, 1, 0);
    CHECK(isomorphic_over_Q(b, Curve::from_ints(0, 0, 0, 16, 0)));
    CHECK_FALSE(isomorphic_over_Q(b, Curve::from_ints(0, 0, 0, 4, 0)));
}

TEST_CASE("family discriminants") {
    for (long t = 1; t <= 10; ++t) {
        Rat T(t);
        auto kkp = make_family({Family::kkp, T});
        CHECK(kkp.discriminant() == -432 * T * T * T * (9 * T + 4));
        auto f3 = make_family({Family::family3, T});
        CHECK(f3.discriminant() == -432 * T * T * T * T * (4 * T * T + 9));
        CHECK(f3.invariants().c4 == 144 * T * T * (T * T + 2));
        auto f5 = make_family({Family::family5, T});
        CHECK(f5.discriminant() == -121634816 * T * T * T * T * T * T);
    }
    for (long l : {1L, -1L, 2L, 7L}) {
        Rat L(l);
        auto k = make_family({Family::kubert5, L});
        CHECK(k.discriminant() == L * L * L * L * L * (L * L - 11 * L - 1));
        CHECK(k.invariants().c4 == 1 + 12 * L + 14 * L * L - 12 * L * L * L + L * L * L * L);
    }
    CHECK_THROWS_AS(make_family({Family::family3, Rat(0)}), InputError);
    CHECK_THROWS_AS(make_family({Family::kkp, make_rat(Int(-4), Int(9))}), InputError);
    CHECK(parse_family("family5") == Family::family5);
    CHECK_THROWS_AS(parse_family("nope"), InputError);
}

TEST_CASE("Kubert families at powers of 5") {
    for (long k = 1; k <= 3; ++k)
        for (int eps : {1, -1}) {
            FamilyParam p{Family::e1k, Rat(0), k, eps};
            CHECK_NOTHROW(make_family(p));
            p.family = Family::e2k;
            CHECK_NOTHROW(make_family(p));
        }
    CHECK_THROWS_AS(make_family({Family::e1k, Rat(0), 0, 1}), InputError);
}

TEST_CASE("QuadInt arithmetic") {
    QuadInt w(1, 1, 5, true);  // golden ratio
    QuadInt w2 = w * w;
    CHECK(w2 == w + QuadInt::integer(1, 5));
    CHECK(w.norm() == -1);
    CHECK(w.trace() == 1);
    QuadInt z(3, 2, -1);
    CHECK(z.norm() == 13);
    CHECK((z * z.conjugate()) == QuadInt::integer(13, -1));
    CHECK_THROWS_AS(QuadInt(1, 0, -1, true), InputError);
    CHECK_THROWS_AS(QuadInt(1, 1, 4), InputError);
    CHECK_THROWS_AS(z + QuadInt::integer(1, 2), InputError);
}

TEST_CASE("curves over quadratic fields") {
    Int d = 6;
    CurveK e{d, {QuadInt(8, -3, d), QuadInt::integer(0, d), QuadInt(49, -20, d), QuadInt::integer(0, d),
                 QuadInt::integer(0, d)}};
    auto inv = invariants_K(e);
    CHECK_FALSE(inv.disc.is_zero());
    // Everywhere good reduction: the discriminant is a unit.
    CHECK(abs(inv.disc.norm()) == 1);
    auto inv_conj = invariants_K(e.conjugate());
    CHECK(inv_conj.disc == inv.disc.conjugate());
    auto r = CurveK::from_rational({Int(0), Int(-1), Int(1), Int(-10), Int(-20)}, Int(-1));
    CHECK(invariants_K(r).disc == QuadInt::integer(-161051, -1));
}

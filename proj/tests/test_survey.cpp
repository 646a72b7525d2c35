#include "ecred/errors.hpp"
#include "ecred/survey.hpp"
#include "ecred/torsion.hpp"
#include "fixtures.hpp"

#include <doctest.h>

using namespace ecred;

namespace {

SurveySpec spec_of(long m, long N, u64 X, Int d = 0) {
    SurveySpec s;
    s.m = m;
    s.N = N;
    s.X = X;
    s.d = d;
    return s;
}

std::set<long> residues_at(const CongruenceTable& t, long s) {
    std::set<long> out;
    auto it = t.buckets.find(s);
    if (it == t.buckets.end()) return out;
    for (auto [r, c] : it->second) out.insert(r);
    return out;
}

ExpectedTable table_50a3() {
    return {15, 5, {{{1, 4}, {0}}, {{3}, {3}}, {{2}, {6}}}};
}

}  // namespace

TEST_CASE("mod-12 survey of y^2 = x^3 - 12x - 11") {
    Curve c = Curve::from_ints(0, 0, 0, -12, -11);
    auto t = congruence_survey(c, spec_of(12, 20, 10000));
    for (long s : {1, 9, 11, 13, 17, 19}) CHECK(residues_at(t, s) == std::set<long>{0});
    for (long s : {3, 7}) CHECK(residues_at(t, s) == std::set<long>{6});
    CHECK(t.buckets.size() == 8);
    u64 sum = 0;
    for (const auto& [s, h] : t.buckets)
        for (auto [r, n] : h) sum += n;
    CHECK(sum == t.total);
    CHECK(t.records.size() == t.total);
    // both residues occur with positive frequency
    CHECK(empirical_density(t, std::nullopt, 0).count > 0);
    CHECK(empirical_density(t, std::nullopt, 6).count > 0);
}

TEST_CASE("17a1 mod 8 by p mod 4") {
    auto t = congruence_survey(fixtures::cached_curve("17a1"), spec_of(8, 4, 10000));
    CHECK(residues_at(t, 1) == std::set<long>{0});
    auto r3 = residues_at(t, 3);
    CHECK(!r3.empty());
    for (long r : r3) CHECK((r == 0 || r == 4));
}

TEST_CASE("trivial modulus") {
    auto t = congruence_survey(Curve::from_ints(0, 0, 1, -1, 0), spec_of(1, 1, 500));
    REQUIRE(t.buckets.size() == 1);
    CHECK(t.buckets.at(0).size() == 1);
    CHECK(t.buckets.at(0).at(0) == t.total);
    Density d = empirical_density(t, std::nullopt, 0);
    CHECK(d.exact == 1);
    CHECK(d.value == 1.0);
}

TEST_CASE("survey spec validation and exclusions") {
    Curve c = Curve::from_ints(0, 0, 0, -12, -11);
    SurveySpec s = spec_of(0, 5, 100);
    CHECK_THROWS_AS(congruence_survey(c, s), InputError);
    s = spec_of(5, 0, 100);
    CHECK_THROWS_AS(congruence_survey(c, s), InputError);
    s = spec_of(12, 20, 100, 7);
    s.exclusions = {13};
    auto t = congruence_survey(c, s);
    for (const auto& r : t.records) {
        CHECK(r.p != 2);
        CHECK(r.p != 3);
        CHECK(r.p != 5);
        CHECK(r.p != 7);
        CHECK(r.p != 13);
    }
    // 2, 3, 5, 7, 13 excluded; the bad primes of this curve are 2 and 3 (already excluded)
    CHECK(t.skipped_excluded == 5);
    CHECK(t.total + t.skipped_excluded + t.skipped_bad == primes_in_range(2, 100).size());
}

TEST_CASE("verify_expected on 50a3") {
    Curve c = fixtures::cached_curve("50a3");
    auto t = congruence_survey(c, spec_of(15, 5, 10000, 5));
    auto rep = verify_expected(t, table_50a3());
    CHECK(rep.pass);
    CHECK(rep.violations.empty());
    CHECK(rep.unmatched == 0);
    CHECK(rep.matched == t.total);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].by_residue.size() == 1);
    CHECK(rep.rows[0].by_residue.count(0));

    SUBCASE("corrupted row is caught at the first violating prime") {
        ExpectedTable bad = table_50a3();
        bad.rows[1].allowed = {4};
        auto r = verify_expected(t, bad);
        CHECK_FALSE(r.pass);
        REQUIRE(!r.violations.empty());
        u64 first = 0;
        for (const auto& rec : t.records)
            if (rec.s == 3) {
                first = rec.p;
                break;
            }
        CHECK(r.violations.front().p == first);
        CHECK(r.violations.front().t == 3);
        CHECK(r.violations.front().allowed == std::set<long>{4});
    }
    SUBCASE("modulus mismatch") {
        ExpectedTable e = table_50a3();
        e.m = 5;
        CHECK_THROWS_AS(verify_expected(t, e), InputError);
    }
    SUBCASE("empty scan passes vacuously") {
        auto empty = congruence_survey(c, spec_of(15, 5, 3, 5));
        CHECK(empty.total == 0);
        auto r = verify_expected(empty, table_50a3());
        CHECK(r.pass);
        CHECK(r.matched == 0);
        CHECK_THROWS_AS(empirical_density(empty, std::nullopt, 0), InputError);
    }
    SUBCASE("empty allowed set rejected") {
        ExpectedTable e = table_50a3();
        e.rows[0].allowed.clear();
        CHECK_THROWS_AS(verify_expected(t, e), InputError);
    }
}

TEST_CASE("densities of the Z/10 example") {
    auto t = congruence_survey(Curve::from_ints(1, 1, 0, -700, 34000), spec_of(10, 5, 20000, 5));
    CHECK(std::abs(empirical_density(t, std::nullopt, 0).value - 0.5) < 0.05);
    CHECK(std::abs(empirical_density(t, std::nullopt, 6).value - 0.25) < 0.05);
    CHECK(std::abs(empirical_density(t, std::nullopt, 8).value - 0.25) < 0.05);
    Density d = empirical_density(t, 2, 6);
    CHECK(d.exact == Rat(Int(d.count), Int(d.total)));
    CHECK(d.count == t.buckets.at(2).at(6));
}

TEST_CASE("gcd of orders over Q") {
    CHECK(gcd_orders(Curve::from_ints(1, -1, 1, -199, 510), 1000) == 2);
    CHECK(gcd_orders(Curve::from_ints(0, 1, 0, -333, -3537), 1000) == 3);
    CHECK(gcd_orders(make_family({Family::kubert5, 1}), 1000) == 1);
    CHECK(gcd_orders(fixtures::cached_curve("11a3"), 1000) == 1);

    Curve c441 = Curve::from_ints(1, -1, 0, -1773, -5720);
    CHECK(gcd_orders(c441, 1000) == 2);  // N_2 = 2
    Int odd = 0;
    for (u64 p : primes_in_range(3, 1000)) {
        Int n = count_points_fp(c441, p).N;
        mpz_gcd(odd.get_mpz_t(), odd.get_mpz_t(), n.get_mpz_t());
    }
    CHECK(odd == 4);
    // without bad primes the gcd can only grow
    Int g = gcd_orders(Curve::from_ints(0, 1, 0, -333, -3537), 1000, false);
    CHECK(g % 3 == 0);
}

TEST_CASE("gcd over a quadratic field from a rational curve") {
    Int g = gcd_orders_quadratic(fixtures::cached_curve("50a3"), 5, 1000);
    CHECK(g % 15 == 0);
}

TEST_CASE("supersingular scans") {
    SUBCASE("E^D with D = 1") {
        Curve c = Curve::from_ints(0, -6, 0, -3, 0);
        auto hits = scan_supersingular(c, 500, {3});
        std::set<u64> got;
        for (const auto& h : hits) got.insert(h.p);
        std::set<u64> want;
        for (u64 p : primes_in_range(5, 500))
            if (p % 3 == 2) want.insert(p);
        CHECK(got == want);
    }
    SUBCASE("Z/10 example") {
        auto hits = scan_supersingular(Curve::from_ints(1, 1, 0, -700, 34000), 10000, {10});
        CHECK(!hits.empty());
        for (const auto& h : hits) CHECK(h.residues[0] == 9);
    }
    SUBCASE("75a2 with l = 5") {
        auto hits = scan_supersingular(fixtures::cached_curve("75a2"), 10000, {5});
        CHECK(!hits.empty());
        for (const auto& h : hits)
            if (h.p != 5) CHECK(h.residues[0] == 4);
    }
}

TEST_CASE("anomalous scans") {
    SUBCASE("175b2") {
        auto hits = scan_anomalous(fixtures::cached_curve("175b2"), 10000, 3);
        size_t checked = 0;
        for (const auto& h : hits)
            if (h.p > 7) {
                CHECK(h.residues[0] == 1);
                ++checked;
            }
        CHECK(checked > 0);
    }
    SUBCASE("torsion of order 4 rules out large anomalous primes") {
        for (const char* label : {"17a1", "63a2", "192c6", "150c3"}) {
            REQUIRE(torsion_over_Q(fixtures::cached_curve(label)).order() % 4 == 0);
            for (const auto& h : scan_anomalous(fixtures::cached_curve(label), 10000, 4)) CHECK(h.p < 7);
        }
    }
    SUBCASE("agrees with a direct filter") {
        Curve c = Curve::from_ints(0, 0, 0, -12, -11);
        std::vector<u64> direct;
        for (u64 p : primes_in_range(2, 500)) {
            PointCount pc = count_points_fp(c, p);
            if (pc.good && pc.N == Int(static_cast<unsigned long>(p))) direct.push_back(p);
        }
        std::vector<u64> got;
        for (const auto& h : scan_anomalous(c, 500, 1)) got.push_back(h.p);
        CHECK(got == direct);
    }
}

TEST_CASE("family verifications") {
    std::vector<FamilyParam> ts;
    for (int t = 1; t <= 10; ++t) ts.push_back({Family::family3, t});
    auto r3 = verify_family(Family::family3, ts, 5000);
    CHECK(r3.pass);
    CHECK(r3.matched > 5000);
    auto rk = verify_family(Family::kkp, ts, 5000);
    CHECK(rk.pass);
    CHECK(rk.matched > 5000);

    std::vector<FamilyParam> t5;
    for (int t : {2, 3, 7}) t5.push_back({Family::family5, t});
    auto r5 = verify_family(Family::family5, t5, 5000);
    CHECK(r5.pass);
    CHECK(r5.matched > 500);

    auto rk5 = verify_family(Family::kubert5, {{Family::kubert5, 1}, {Family::kubert5, 2}, {Family::kubert5, Rat(1, 3)}}, 2000);
    CHECK(rk5.pass);
    FamilyParam e1{Family::e1k, 0, 1, 1}, e1m{Family::e1k, 0, 1, -1};
    FamilyParam e2{Family::e2k, 0, 1, 1}, e2m{Family::e2k, 0, 2, -1};
    CHECK(verify_family(Family::e1k, {e1, e1m}, 2000).pass);
    CHECK(verify_family(Family::e2k, {e2, e2m}, 2000).pass);

    SUBCASE("the residue condition of family5 is needed") {
        Curve c = make_family({Family::family5, 2});
        bool seen = false;
        for (u64 p : primes_in_range(7, 2000)) {
            if (p == 29 || legendre_u64(2 % p, p) != -1) continue;
            PointCount pc = count_points_fp(c, p);
            if (pc.good && pc.N % 5 != 0) seen = true;
        }
        CHECK(seen);
    }
}

TEST_CASE("kubert-check conditions") {
    SUBCASE("singular") {
        auto v = check_kubert_conditions({0, 0, 0, 0, 0}, 1, 5);
        CHECK_FALSE(v.accepted);
        CHECK(v.reason == "singular");
    }
    SUBCASE("no z_T") {
        auto v = check_kubert_conditions({0, 0, 0, 0, 2}, 0, 5);
        CHECK_FALSE(v.accepted);
        CHECK(v.reason == "no z_T");
    }
    SUBCASE("exhaustive over F_5 short models") {
        const u64 p = 5;
        int accepted = 0;
        for (u64 a4 = 0; a4 < p; ++a4)
            for (u64 a6 = 0; a6 < p; ++a6)
                for (u64 T = 0; T < p; ++T) {
                    auto v = check_kubert_conditions({0, 0, 0, a4, a6}, T, p);
                    if (!v.accepted) continue;
                    ++accepted;
                    CHECK(v.divisible);
                    CHECK(count_points_mod_p({0, 0, 0, a4, a6}, p) % 5 == 0);
                }
        CHECK(accepted > 0);
    }
    SUBCASE("exhaustive over all F_7 models: accepted iff a point of order 7 at x = T") {
        const u64 p = 7;
        int accepted = 0;
        std::array<u64, 5> a{};
        for (a[0] = 0; a[0] < p; ++a[0])
            for (a[1] = 0; a[1] < p; ++a[1])
                for (a[2] = 0; a[2] < p; ++a[2])
                    for (a[3] = 0; a[3] < p; ++a[3])
                        for (a[4] = 0; a[4] < p; ++a[4])
                            for (u64 T = 0; T < p; ++T) {
                                auto v = check_kubert_conditions(a, T, p);
                                if (!v.accepted) continue;
                                ++accepted;
                                CHECK(v.divisible);
                            }
        CHECK(accepted > 0);
    }
    SUBCASE("kubert family reduction has an order-5 point at x = 0 over F_7") {
        // lambda = 2: y^2 - xy - 2y = x^3 - 2x^2
        auto v = check_kubert_conditions({6, 5, 5, 0, 0}, 0, 7, 5);
        CHECK(v.accepted);
        CHECK(v.divisible);
    }
    CHECK_THROWS_AS(check_kubert_conditions({0, 0, 0, 1, 1}, 0, 37), InputError);
}

TEST_CASE("parallel surveys are deterministic") {
    Curve c = fixtures::cached_curve("50a3");
    SurveySpec s = spec_of(15, 5, 20000, 5);
    s.threads = 1;
    auto base = congruence_survey(c, s);
    for (unsigned k : {2u, 3u, 8u}) {
        s.threads = k;
        auto t = congruence_survey(c, s);
        CHECK(t == base);
        CHECK(to_markdown(t) == to_markdown(base));
        CHECK(to_json(t).dump() == to_json(base).dump());
    }
}

TEST_CASE("torsion order divides counts at good odd primes") {
    for (const auto& row : fixtures::read_tsv("torsion_fixtures.tsv")) {
        static int n = 0;
        if (++n % 8 != 0) continue;  // sample of the fixture
        Curve c = fixtures::curve_from(fixtures::parse_ainvs(row[1]));
        long order = std::stol(row[2]) * std::stol(row[3]);
        for (u64 p : primes_in_range(3, 2000)) {
            PointCount pc = count_points_fp(c, p);
            if (pc.good) CHECK(pc.N % order == 0);
        }
    }
}

TEST_CASE("a single observed residue class is zero") {
    const char* labels[] = {"14a1", "17a1", "19a1", "50a3", "50b1", "75a2", "175b2", "208d1", "90c6"};
    for (const char* label : labels) {
        Curve c = fixtures::cached_curve(label);
        for (long m = 2; m <= 24; ++m) {
            SurveySpec s = spec_of(m, 1, 3000);
            s.auto_exclude = false;
            auto t = congruence_survey(c, s);
            auto rs = residues_at(t, 0);
            if (rs.size() == 1) CHECK(*rs.begin() == 0);
        }
    }
}

TEST_CASE("odd-order dichotomy on table rows") {
    struct Row {
        const char* label;
        long d;
        long l;
        long m;
    };
    const Row rows[] = {{"175b2", 5, 3, 3},   {"75a2", 5, 5, 5},     {"208d1", -1, 7, 7},
                        {"54a2", -3, 9, 9},   {"98a4", -7, 3, 6},    {"150b3", 5, 5, 10},
                        {"450a3", -15, 5, 20}, {"50a3", 5, 5, 15},   {"50b1", 5, 3, 15},
                        {"36a3", -3, 3, 12},  {"150c3", -15, 3, 24}, {"960o6", 6, 3, 24}};
    for (const auto& r : rows) {
        CAPTURE(r.label);
        Curve c = fixtures::cached_curve(r.label);
        u64 checked = 0;
        for (u64 p : primes_in_range(3, 10000)) {
            if (mod_u64(Int(2 * r.d * r.m), p) == 0) continue;
            PointCount pc = count_points_fp(c, p);
            if (!pc.good) continue;
            int chi = legendre_u64(mod_u64(Int(r.d), p), p);
            long got = static_cast<long>(mod_u64(pc.N, static_cast<u64>(r.l)));
            long want = chi == 1 ? 0 : static_cast<long>((2 * p + 2) % static_cast<u64>(r.l));
            CHECK(got == want);
            ++checked;
        }
        CHECK(checked > 1000);
    }
}

TEST_CASE("report emitters") {
    Curve c = Curve::from_ints(0, 0, 0, -12, -11);
    auto t = congruence_survey(c, spec_of(12, 20, 2000));
    std::string md = to_markdown(t);
    CHECK(md.find("| \\|E_p(F_p)\\| mod m") == 0);
    CHECK(md.find("| 0 mod 12           | 1,9,11,13,17,19 mod 20 |") != std::string::npos);
    CHECK(md.find("| 6 mod 12           | 3,7 mod 20             |") != std::string::npos);
    auto j = nlohmann::json::parse(to_json(t).dump());
    CHECK(j["m"] == 12);
    CHECK(j["rows"].size() == 8);
    std::string csv = to_csv(t);
    CHECK(csv.rfind("p_mod_N,N_p_mod_m,count\n", 0) == 0);

    ExpectedTable e{12, 20, {{{1, 9, 11, 13, 17, 19}, {0}}, {{3, 7}, {6}}}};
    auto rep = verify_expected(t, e);
    CHECK(rep.pass);
    std::string rmd = to_markdown(rep, &e);
    CHECK(rmd.find("PASS") != std::string::npos);
    auto rj = to_json(rep);
    CHECK(rj["pass"] == true);
    CHECK(rj["rows"].size() == 2);
    CHECK(render_set({0, 6}) == "{0,6}");
}

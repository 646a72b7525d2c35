// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any criterion fails.

#include "ecred/catalog.hpp"
#include "ecred/cli.hpp"
#include "ecred/errors.hpp"
#include "ecred/reduction.hpp"
#include "ecred/survey.hpp"
#include "ecred/torsion.hpp"
#include "torsion_props.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

using namespace ecred;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

ResolverConfig offline_cache() {
    ResolverConfig cfg;
    cfg.cache_dir = ECRED_CACHE_FIXTURE_DIR;
    cfg.offline = true;
    return cfg;
}

const CurveRecord& entry(const std::string& id) {
    const CurveRecord* r = corpus_entry(id);
    if (!r) throw std::runtime_error("corpus entry missing: " + id);
    return *r;
}

Curve corpus_curve(const std::string& id) { return record_curve(entry(id), offline_cache()); }

unsigned workers() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

// 1. every congruence-table row at X = 10^4, single-threaded
void criterion1(Outcome& o) {
    auto t0 = std::chrono::steady_clock::now();
    CorpusReport rep = corpus_verify(10000, offline_cache(), 1);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    size_t violations = 0, primes = 0;
    for (const auto& r : rep.rows) {
        violations += r.scan.violations.size();
        primes += r.scan.matched;
        o.require(r.scan.pass, r.label + " congruences");
        o.require(r.torsion_Q_ok, r.label + " torsion " + r.torsion_Q);
        o.require(r.odd_K == r.odd_K_expected && r.bound_ok && r.phi2_ok, r.label + " quadratic torsion");
    }
    o.require(rep.rows.size() == 24, "24 rows");
    o.require(secs < 120, "runtime under 2 min");
    o.detail << rep.rows.size() << " rows, " << primes << " row-primes, " << violations << " violations, "
             << static_cast<int>(secs * 10) / 10.0 << " s";
}

// 2. gcd over all primes at X = 10^3
void criterion2(Outcome& o) {
    const u64 X = 1000;
    struct Want {
        const char* id;
        long gcd;
    };
    for (Want w : {Want{"gcd-2", 2}, Want{"gcd-3", 3}, Want{"gcd-4", 4}, Want{"kubert5-l1", 1}}) {
        Int g = gcd_orders(corpus_curve(w.id), X, true);
        o.detail << w.id << "=" << g << " ";
        o.require(g == w.gcd, std::string(w.id) + " expected " + std::to_string(w.gcd));
    }
    Curve c4 = corpus_curve("gcd-4");
    Int odd = 0;
    for (u64 p : primes_in_range(3, X)) {
        PointCount pc = count_points_fp(c4, p);
        odd = gcd(odd, pc.N);
    }
    o.detail << "(gcd-4 over odd p: " << odd << ", N_2 = " << count_points_fp(c4, 2).N
             << ", gcd-4-printed: " << gcd_orders(corpus_curve("gcd-4-printed"), X, true) << ") ";
    long worst = 0;
    size_t n = 0;
    for (const auto& r : builtin_corpus()) {
        if (r.curve_k) continue;
        Int g = gcd_orders(record_curve(r, offline_cache()), X, true);
        worst = std::max(worst, g.get_si());
        ++n;
        o.require(g >= 1 && g <= 4, r.id + " gcd " + g.get_str());
    }
    o.detail << "max over " << n << " corpus curves: " << worst;
}

// 3. gcd over Q(sqrt 33) and Q(sqrt 6)
void criterion3(Outcome& o) {
    Int g33 = gcd_orders_quadratic(*entry("quad-sqrt33").curve_k, 2000);
    Int g6 = gcd_orders_quadratic(*entry("quad-sqrt6").curve_k, 2000);
    o.require(g33 == 3, "Q(sqrt 33) gcd 3");
    o.require(g6 == 6, "Q(sqrt 6) gcd 6");
    o.detail << "Q(sqrt 33): " << g33 << ", Q(sqrt 6): " << g6;
}

// 4. families at X = 5000
void criterion4(Outcome& o) {
    auto params = [](Family f, std::vector<long> ts) {
        std::vector<FamilyParam> out;
        for (long t : ts) out.push_back({f, Rat(t), 1, 1});
        return out;
    };
    std::vector<long> one_to_ten{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    struct Case {
        Family f;
        std::vector<long> ts;
    };
    for (const Case& c : {Case{Family::family3, one_to_ten}, Case{Family::family5, {2, 3, 7}},
                          Case{Family::kkp, one_to_ten}}) {
        ScanReport r = verify_family(c.f, params(c.f, c.ts), 5000);
        o.require(r.pass && r.violations.empty(), family_name(c.f));
        o.detail << family_name(c.f) << ": " << r.matched << " primes, " << r.violations.size() << " violations; ";
    }
}

// 5. extension counts and the twist identity on random curves
void criterion5(Outcome& o) {
    std::mt19937_64 rng(20261014);
    std::uniform_int_distribution<long> coef(-60, 60);
    std::vector<Curve> curves;
    while (curves.size() < 20) {
        try {
            curves.push_back(Curve::from_ints(coef(rng) % 2, coef(rng) % 3, coef(rng) % 2, coef(rng), coef(rng)));
        } catch (const SingularModelError&) {
        }
    }
    size_t direct = 0, closed = 0, twist = 0;
    for (const Curve& c : curves) {
        for (u64 p : primes_in_range(3, 1000)) {
            PointCount pc = count_points_fp(c, p);
            if (!pc.good) continue;
            if (p <= 47) {
                Int rec = count_extension(*pc.a, p, 2).N;
                o.require(rec == count_fp2_direct(c, p), c.str() + " n=2 at " + std::to_string(p));
                ++direct;
            }
            o.require(closed_form_extension_count(pc.N, p, 3) == count_extension(*pc.a, p, 3).N,
                      c.str() + " n=3 at " + std::to_string(p));
            ++closed;
            o.require(twist_count_identity_check(c, p), c.str() + " twist at " + std::to_string(p));
            ++twist;
        }
    }
    o.detail << "20 curves: " << direct << " F_{p^2} direct counts, " << closed << " n=3 closed forms, " << twist
             << " twist identities";
}

// 6. torsion structures of the cited curves
void criterion6(Outcome& o) {
    Curve z10 = corpus_curve("z10");
    struct Want {
        std::string what;
        Curve c;
        std::string structure;
    };
    std::vector<Want> wants{{"z10", z10, "Z/2"},
                            {"z10 twist by 5", quadratic_twist(z10, 5), "Z/10"},
                            {"gcd-2", corpus_curve("gcd-2"), "Z/4"},
                            {"gcd-4", corpus_curve("gcd-4"), "Z/2 x Z/2"},
                            {"gcd-3", corpus_curve("gcd-3"), "Z/3"}};
    for (const auto& w : wants) {
        std::string got = torsion_over_Q(w.c).str();
        o.require(got == w.structure, w.what + " gave " + got);
        o.detail << w.what << ": " << got << "; ";
    }
    o.detail << "gcd-4-printed: " << torsion_over_Q(corpus_curve("gcd-4-printed")).str() << "; ";
    Int odd = odd_torsion_over_quadratic(record_curve(*corpus_entry("table-50a3"), offline_cache()), 5);
    o.require(odd == 15, "50a3 over Q(sqrt 5)");
    o.detail << "50a3 odd torsion over Q(sqrt 5): " << odd;
}

// 7. supersingular and anomalous congruences
void criterion7(Outcome& o) {
    Curve ed = corpus_curve("cm-eD-1");
    std::set<u64> ss, want;
    for (const auto& h : scan_supersingular(ed, 500, {3})) ss.insert(h.p);
    for (u64 p : primes_in_range(5, 500))
        if (p % 3 == 2 && count_points_fp(ed, p).good) want.insert(p);
    o.require(ss == want, "E^D supersingular set");
    o.detail << "E^D: " << ss.size() << " supersingular primes in [5,500], all and only 2 mod 3; ";

    auto z10 = scan_supersingular(corpus_curve("z10"), 10000, {10});
    for (const auto& h : z10) o.require(h.residues[0] == 9, "z10 p = " + std::to_string(h.p));
    o.require(!z10.empty(), "z10 has supersingular primes");
    o.detail << "z10: " << z10.size() << " supersingular primes <= 10^4, all 9 mod 10; ";

    auto an = scan_anomalous(record_curve(*corpus_entry("table-175b2"), offline_cache()), 10000, 3);
    size_t n = 0;
    for (const auto& h : an) {
        if (h.p < 11) continue;
        ++n;
        o.require(h.residues[0] == 1, "175b2 anomalous p = " + std::to_string(h.p));
    }
    o.require(n > 0, "175b2 has anomalous primes");
    o.detail << "175b2: " << n << " anomalous primes in [11,10^4], all 1 mod 3";
}

// 8. densities at X = 10^5 within 0.05
void criterion8(Outcome& o) {
    const double tol = 0.05;
    auto t0 = std::chrono::steady_clock::now();
    auto table = [&](const std::string& id, long m) {
        SurveySpec s;
        s.m = m;
        s.X = 100000;
        s.threads = workers();
        return congruence_survey(corpus_curve(id), s);
    };
    auto check = [&](const CongruenceTable& t, long residue, double want, const std::string& what) {
        Density d = empirical_density(t, std::nullopt, residue);
        o.require(std::fabs(d.value - want) <= tol, what);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%ld:%.4f ", residue, d.value);
        o.detail << buf;
    };
    CongruenceTable z10 = table("z10", 10);
    o.detail << "z10 mod 10 ";
    check(z10, 0, 0.5, "z10 residue 0");
    check(z10, 6, 0.25, "z10 residue 6");
    check(z10, 8, 0.25, "z10 residue 8");
    CongruenceTable m12 = table("mod12", 12);
    o.detail << "mod12 ";
    check(m12, 0, 0.75, "mod12 residue 0");
    check(m12, 6, 0.25, "mod12 residue 6");
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < 60, "under 1 min");
    o.detail << "(tolerance 0.05, " << workers() << " workers, " << static_cast<int>(secs * 10) / 10.0 << " s)";
}

// 9. property suites
void criterion9(Outcome& o) {
    std::vector<Curve> curves;
    for (const CurveRecord* r : table_rows()) curves.push_back(record_curve(*r, offline_cache()));
    for (const char* id : {"gcd-2", "gcd-3", "gcd-4", "z10", "mod12", "kubert5-l1"}) curves.push_back(corpus_curve(id));

    size_t hasse = 0, inject = 0;
    for (const Curve& c : curves) {
        long order = torsion_over_Q(c).order();
        for (u64 p : primes_in_range(2, 1000)) {
            PointCount pc = count_points_fp(c, p);
            if (!pc.good) continue;
            Int a = *pc.a;
            o.require(a * a <= 4 * Int(static_cast<unsigned long>(p)), "Hasse " + c.str());
            ++hasse;
            if (p > 2) {
                o.require(pc.N % order == 0, "injection " + c.str() + " at " + std::to_string(p));
                ++inject;
            }
        }
    }
    o.detail << hasse << " Hasse, " << inject << " injection checks; ";

    size_t roots = 0;
    for (const char* id : {"mod12", "z10", "gcd-2", "kubert5-l1"}) {
        Curve c = corpus_curve(id);
        for (long m = 2; m <= 7; ++m) {
            Polynomial<Rat> f = torsion_x_polynomial(c, m);
            for (u64 p : primes_in_range(3, 31)) {
                if (m % static_cast<long>(p) == 0) continue;
                bool good = true;
                reduced_model(c, p, good);
                if (!good || mod_u64(c.integral_scale(), p) == 0) continue;
                FpCurve E = reduce_curve(c, p);
                o.require(torsion_props::roots_mod(f, p) == torsion_props::torsion_xs(E, m),
                          std::string("psi roots ") + id + " m=" + std::to_string(m) + " p=" + std::to_string(p));
                ++roots;
            }
        }
    }
    o.detail << roots << " psi_m root sets; ";

    size_t degs = 0;
    for (size_t i = 0; i < 8; ++i)
        for (long m = 1; m <= 11; m += 2) {
            o.require(division_polynomial(curves[i], m).poly.degree() == (m * m - 1) / 2, "deg psi_m");
            ++degs;
        }
    o.detail << degs << " odd-m degrees; ";

    SurveySpec s;
    s.m = 15;
    s.N = 5;
    s.X = 50000;
    Curve c = record_curve(*corpus_entry("table-50a3"), offline_cache());
    s.threads = 1;
    CongruenceTable base = congruence_survey(c, s);
    for (unsigned k : {2u, 3u, 8u}) {
        s.threads = k;
        CongruenceTable t = congruence_survey(c, s);
        o.require(t == base && to_json(t).dump() == to_json(base).dump(), "threads " + std::to_string(k));
    }
    o.detail << "survey identical with 1, 2, 3, 8 workers";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"congruence table rows at X=10^4", criterion1},
        {"gcd of orders over Q", criterion2},
        {"gcd over quadratic fields", criterion3},
        {"parametric families", criterion4},
        {"extension counts and twist identity", criterion5},
        {"rational torsion of the cited curves", criterion6},
        {"supersingular and anomalous congruences", criterion7},
        {"densities at X=10^5", criterion8},
        {"property suites", criterion9},
    };
    int failed = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "[exception: " << e.what() << "]";
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": "
                  << o.detail.str() << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria pass" << std::endl;
    return failed ? 1 : 0;
}

#include "ecred/survey.hpp"

#include "ecred/errors.hpp"
#include "ecred/torsion.hpp"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ecred {

namespace {

long lmod(const Int& a, long m) {
    return static_cast<long>(mod_u64(a, static_cast<u64>(m)));
}

void gcd_into(Int& g, const Int& n) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << v;
    return os.str();
}

Density make_density(u64 count, u64 total) {
    Density d;
    d.count = count;
    d.total = total;
    d.exact = total ? Rat(Int(count), Int(total)) : Rat(0);
    d.exact.canonicalize();
    d.value = total ? static_cast<double>(count) / static_cast<double>(total) : 0.0;
    return d;
}

// Aligned markdown table.
std::string md_table(const std::vector<std::string>& head,
                     const std::vector<std::vector<std::string>>& rows) {
    std::vector<size_t> w(head.size());
    for (size_t i = 0; i < head.size(); ++i) w[i] = std::max<size_t>(3, head[i].size());
    for (const auto& r : rows)
        for (size_t i = 0; i < r.size(); ++i) w[i] = std::max(w[i], r[i].size());
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& r) {
        os << '|';
        for (size_t i = 0; i < w.size(); ++i) {
            const std::string& cell = i < r.size() ? r[i] : std::string();
            os << ' ' << cell << std::string(w[i] - cell.size(), ' ') << " |";
        }
        os << '\n';
    };
    line(head);
    os << '|';
    for (size_t i = 0; i < w.size(); ++i) os << std::string(w[i] + 2, '-') << '|';
    os << '\n';
    for (const auto& r : rows) line(r);
    return os.str();
}

std::string join_set(const std::set<long>& s) {
    std::string out;
    for (long v : s) {
        if (!out.empty()) out += ',';
        out += std::to_string(v);
    }
    return out;
}

std::string rat_str(const Rat& q) { return q.get_str(); }

nlohmann::ordered_json density_json(const Density& d) {
    return {{"count", d.count}, {"total", d.total}, {"exact", rat_str(d.exact)}, {"value", d.value}};
}

}  // namespace

void SurveySpec::validate() const {
    if (m < 1) throw InputError("survey: m must be >= 1");
    if (N < 1) throw InputError("survey: N must be >= 1");
    if (X < 2) throw InputError("survey: X must be >= 2");
    if (threads < 1) throw InputError("survey: threads must be >= 1");
}

bool SurveySpec::excluded(u64 p) const {
    if (exclusions.count(p)) return true;
    if (!auto_exclude) return false;
    if (p == 2) return true;
    if (m % static_cast<long>(p) == 0 || N % static_cast<long>(p) == 0) return true;
    return d != 0 && mod_u64(d, p) == 0;
}

bool operator==(const CongruenceTable& a, const CongruenceTable& b) {
    if (a.m != b.m || a.N != b.N || a.X != b.X || a.buckets != b.buckets || a.total != b.total ||
        a.skipped_bad != b.skipped_bad || a.skipped_excluded != b.skipped_excluded ||
        a.records.size() != b.records.size())
        return false;
    for (size_t i = 0; i < a.records.size(); ++i) {
        const auto &x = a.records[i], &y = b.records[i];
        if (x.p != y.p || x.N != y.N || x.s != y.s || x.t != y.t) return false;
    }
    return true;
}

CongruenceTable congruence_survey(const Curve& c, const SurveySpec& spec) {
    spec.validate();
    const std::vector<u64> primes = primes_in_range(2, spec.X);

    struct Partial {
        std::vector<PrimeRecord> records;
        u64 bad = 0, excluded = 0;
    };
    const size_t chunk = 64;
    const size_t nchunks = (primes.size() + chunk - 1) / chunk;
    std::vector<Partial> parts(nchunks);
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;

    auto worker = [&] {
        for (;;) {
            size_t k = next.fetch_add(1);
            if (k >= nchunks) return;
            try {
                Partial& part = parts[k];
                size_t end = std::min(primes.size(), (k + 1) * chunk);
                for (size_t i = k * chunk; i < end; ++i) {
                    u64 p = primes[i];
                    if (spec.excluded(p)) {
                        ++part.excluded;
                        continue;
                    }
                    PointCount pc = count_points_fp(c, p);
                    if (!pc.good) {
                        ++part.bad;
                        continue;
                    }
                    part.records.push_back(
                        {p, pc.N, static_cast<long>(p % static_cast<u64>(spec.N)), lmod(pc.N, spec.m)});
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mu);
                if (!failure) failure = std::current_exception();
                next = nchunks;
                return;
            }
        }
    };

    unsigned nthreads = std::min<unsigned>(spec.threads, std::max<size_t>(1, nchunks));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    CongruenceTable table;
    table.m = spec.m;
    table.N = spec.N;
    table.X = spec.X;
    for (auto& part : parts) {
        table.skipped_bad += part.bad;
        table.skipped_excluded += part.excluded;
        for (auto& r : part.records) {
            ++table.buckets[r.s][r.t];
            ++table.total;
            table.records.push_back(std::move(r));
        }
    }
    return table;
}

void ExpectedTable::validate() const {
    if (m < 1 || a < 1) throw InputError("expected table: moduli must be >= 1");
    std::set<long> seen;
    for (const auto& r : rows) {
        if (r.allowed.empty()) throw InputError("expected table: empty allowed set");
        for (long s : r.classes)
            if (!seen.insert(((s % a) + a) % a).second)
                throw InputError("expected table: class " + std::to_string(s) + " listed twice");
        for (long t : r.allowed)
            if (t < 0 || t >= m) throw InputError("expected table: residue out of range");
    }
}

const ExpectedRow* ExpectedTable::row_for(long s) const {
    for (const auto& r : rows)
        for (long c : r.classes)
            if (((c % a) + a) % a == s) return &r;
    return nullptr;
}

ScanReport verify_expected(const CongruenceTable& table, const ExpectedTable& exp) {
    if (table.m != exp.m || table.N != exp.a)
        throw InputError("verify_expected: modulus mismatch (table " + std::to_string(table.m) + "/" +
                         std::to_string(table.N) + ", expected " + std::to_string(exp.m) + "/" +
                         std::to_string(exp.a) + ")");
    exp.validate();
    ScanReport rep;
    std::vector<u64> row_count(exp.rows.size(), 0);
    std::vector<std::map<long, u64>> row_hist(exp.rows.size());
    for (const auto& r : table.records) {
        const ExpectedRow* row = exp.row_for(r.s);
        if (!row) {
            ++rep.unmatched;
            continue;
        }
        ++rep.matched;
        size_t idx = static_cast<size_t>(row - exp.rows.data());
        ++row_count[idx];
        ++row_hist[idx][r.t];
        if (!row->allowed.count(r.t)) rep.violations.push_back({r.p, r.N, r.t, r.s, row->allowed});
    }
    for (size_t i = 0; i < exp.rows.size(); ++i) {
        RowDensity rd;
        rd.classes = exp.rows[i].classes;
        rd.primes = row_count[i];
        for (auto [t, n] : row_hist[i]) rd.by_residue[t] = make_density(n, rep.matched);
        rep.rows.push_back(std::move(rd));
    }
    if (rep.unmatched)
        rep.notes.push_back(std::to_string(rep.unmatched) + " primes fall in classes without a row");
    rep.pass = rep.violations.empty();
    return rep;
}

Density empirical_density(const CongruenceTable& table, std::optional<long> s, long t) {
    if (table.total == 0) throw InputError("empirical_density: empty table");
    long tt = ((t % table.m) + table.m) % table.m;
    u64 count = 0;
    for (const auto& [cls, hist] : table.buckets) {
        if (s && cls != ((*s % table.N) + table.N) % table.N) continue;
        auto it = hist.find(tt);
        if (it != hist.end()) count += it->second;
    }
    return make_density(count, table.total);
}

Int gcd_orders(const Curve& c, u64 X, bool include_bad) {
    Int g = 0;
    for (u64 p : primes_in_range(2, X)) {
        PointCount pc = count_points_fp(c, p);
        if (!pc.good && !include_bad) continue;
        gcd_into(g, pc.N);
        if (g == 1) break;
    }
    return g;
}

Int gcd_orders_quadratic(const Curve& c, const Int& d, u64 X) { return quadratic_torsion_bound(c, d, X); }

Int gcd_orders_quadratic(const CurveK& c, u64 X) {
    if (X < 100) throw InputError("gcd_orders_quadratic needs X >= 100");
    Int g = 0;
    for (u64 p : primes_in_range(3, X)) {
        if (splitting(c.d, p).kind == QuadraticPrimeSplitting::Kind::ramified) continue;
        QuadraticPrimeCounts qc = count_curveK_at_prime(c, p);
        if (qc.bad) continue;
        for (const Int& n : qc.counts) gcd_into(g, n);
        if (g == 1) break;
    }
    return g;
}

std::vector<ResidueHit> scan_supersingular(const Curve& c, u64 X, const std::vector<long>& moduli) {
    std::vector<ResidueHit> out;
    for (u64 p : primes_in_range(5, X)) {
        PointCount pc = count_points_fp(c, p);
        if (!pc.good || *pc.a != 0) continue;
        ResidueHit h{p, {}};
        for (long m : moduli) h.residues.push_back(static_cast<long>(p % static_cast<u64>(m)));
        out.push_back(std::move(h));
    }
    return out;
}

std::vector<ResidueHit> scan_anomalous(const Curve& c, u64 X, long modulus) {
    std::vector<ResidueHit> out;
    for (u64 p : primes_in_range(2, X)) {
        PointCount pc = count_points_fp(c, p);
        if (!pc.good || mod_u64(pc.N, p) != 0) continue;
        out.push_back({p, {static_cast<long>(p % static_cast<u64>(modulus))}});
    }
    return out;
}

bool family_prime_qualifies(const FamilyParam& fp, u64 p) {
    const Int P(static_cast<unsigned long>(p));
    auto unit = [&](const Rat& q) { return q != 0 && valuation(q, P).value() == 0; };
    const Rat& t = fp.t;
    switch (fp.family) {
        case Family::family3:
            return p != 2 && p != 3 && unit(t * (9 + 4 * t * t));
        case Family::family5:
            return p != 2 && p != 3 && p != 29 && unit(t) && legendre_u64(mod_u64(t, p), p) == 1;
        case Family::kkp:
            return p > 3 && unit(t * (9 * t + 4));
        case Family::kubert5:
        case Family::e1k:
        case Family::e2k:
            return p != 5;
    }
    return false;
}

ScanReport verify_family(Family family, const std::vector<FamilyParam>& params, u64 X) {
    const long divisor = (family == Family::family3 || family == Family::kkp) ? 3 : 5;
    ScanReport rep;
    rep.name = family_name(family);
    for (FamilyParam fp : params) {
        fp.family = family;
        Curve c = make_family(fp);
        for (u64 p : primes_in_range(2, X)) {
            if (!family_prime_qualifies(fp, p)) continue;
            PointCount pc = count_points_fp(c, p);
            if (!pc.good) continue;
            ++rep.matched;
            long t = lmod(pc.N, divisor);
            if (t != 0) rep.violations.push_back({p, pc.N, t, 0, {0}});
        }
    }
    rep.notes.push_back("checked " + std::to_string(divisor) + " | N_p on qualifying good primes");
    rep.pass = rep.violations.empty();
    return rep;
}

KubertVerdict check_kubert_conditions(const std::array<u64, 5>& A, u64 T, u64 p, u64 order) {
    if (p < 3 || p > static_cast<u64>(kMaxDivisionIndex) + 1 || !is_prime(Int(static_cast<unsigned long>(p))))
        throw InputError("kubert-check: p must be an odd prime <= 31");
    if (order == 0) order = p;
    if (order < 3 || order % 2 == 0 || order > static_cast<u64>(kMaxDivisionIndex))
        throw InputError("kubert-check: order must be odd and <= 29");
    std::array<u64, 5> a;
    for (int i = 0; i < 5; ++i) a[i] = A[i] % p;
    T %= p;

    KubertVerdict v;
    // (i) discriminant of the reduction
    auto w = weierstrass_quantities<Int>(Int(a[0]), Int(a[1]), Int(a[2]), Int(a[3]), Int(a[4]));
    bool singular = mod_u64(w.disc, p) == 0;
    if (singular) {
        v.reason = "singular";
        return v;
    }
    // (ii) z^2 + (a1 T + a3) z = f(T)
    u64 b = (mulmod(a[0], T, p) + a[2]) % p;
    u64 f = (mulmod(mulmod(T, T, p), T, p) + mulmod(a[1], mulmod(T, T, p), p) + mulmod(a[3], T, p) + a[4]) % p;
    u64 disc = (mulmod(b, b, p) + mulmod(4, f, p)) % p;
    auto root = sqrt_mod_u64(disc, p);
    if (!root) {
        v.reason = "no z_T";
        return v;
    }
    u64 inv2 = invmod(2, p);
    v.z = mulmod((*root + p - b) % p, inv2, p);
    // psi_order(T) = 0
    if (u64 g = division_value_mod_p(a, T, static_cast<long>(order), p); g != 0) {
        v.reason = "psi nonzero";
        return v;
    }
    v.accepted = true;
    u64 n = count_points_mod_p(a, p);
    v.count = n;
    FpCurve E{p, a};
    Int ord = point_order(E, FpPoint::affine(T, *v.z));
    v.divisible = n % order == 0 && ord == Int(static_cast<unsigned long>(order));
    v.reason = v.divisible ? "ok" : "count check failed";
    return v;
}

std::string render_set(const std::set<long>& s) { return "{" + join_set(s) + "}"; }

nlohmann::ordered_json to_json(const CongruenceTable& t) {
    nlohmann::ordered_json j;
    j["m"] = t.m;
    j["N"] = t.N;
    j["max_prime"] = t.X;
    j["total"] = t.total;
    j["skipped_bad"] = t.skipped_bad;
    j["skipped_excluded"] = t.skipped_excluded;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& [s, hist] : t.buckets) {
        auto counts = nlohmann::ordered_json::array();
        u64 n = 0;
        for (auto [res, c] : hist) {
            counts.push_back({{"residue", res}, {"count", c}});
            n += c;
        }
        rows.push_back({{"class", s}, {"primes", n}, {"residues", counts}});
    }
    j["rows"] = rows;
    return j;
}

nlohmann::ordered_json to_json(const ScanReport& r) {
    nlohmann::ordered_json j;
    if (!r.name.empty()) j["name"] = r.name;
    j["pass"] = r.pass;
    j["matched"] = r.matched;
    j["unmatched"] = r.unmatched;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& rd : r.rows) {
        auto dens = nlohmann::ordered_json::array();
        for (const auto& [t, d] : rd.by_residue) {
            auto e = density_json(d);
            e["residue"] = t;
            dens.push_back(e);
        }
        rows.push_back({{"classes", std::vector<long>(rd.classes.begin(), rd.classes.end())},
                        {"primes", rd.primes},
                        {"densities", dens}});
    }
    j["rows"] = rows;
    auto viol = nlohmann::ordered_json::array();
    for (const auto& v : r.violations)
        viol.push_back({{"p", v.p},
                        {"N_p", v.N.get_str()},
                        {"N_p_mod_m", v.t},
                        {"p_mod_N", v.s},
                        {"allowed", std::vector<long>(v.allowed.begin(), v.allowed.end())}});
    j["violations"] = viol;
    j["notes"] = r.notes;
    return j;
}

std::string to_csv(const CongruenceTable& t) {
    std::ostringstream os;
    os << "p_mod_N,N_p_mod_m,count\n";
    for (const auto& [s, hist] : t.buckets)
        for (auto [res, c] : hist) os << s << ',' << res << ',' << c << '\n';
    return os.str();
}

std::string to_csv(const ScanReport& r) {
    std::ostringstream os;
    os << "kind,p,N_p,N_p_mod_m,p_mod_N,allowed\n";
    for (const auto& v : r.violations)
        os << "violation," << v.p << ',' << v.N.get_str() << ',' << v.t << ',' << v.s << ",\""
           << join_set(v.allowed) << "\"\n";
    os << "summary,,,,,\"matched=" << r.matched << " unmatched=" << r.unmatched
       << " pass=" << (r.pass ? "true" : "false") << "\"\n";
    return os.str();
}

std::string to_markdown(const CongruenceTable& t) {
    // classes with the same observed residue set share a row
    std::vector<std::pair<std::set<long>, std::set<long>>> groups;  // residues -> classes
    std::vector<u64> counts;
    for (const auto& [s, hist] : t.buckets) {
        std::set<long> res;
        u64 n = 0;
        for (auto [r, c] : hist) {
            res.insert(r);
            n += c;
        }
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == res; });
        if (it == groups.end()) {
            groups.push_back({res, {s}});
            counts.push_back(n);
        } else {
            it->second.insert(s);
            counts[static_cast<size_t>(it - groups.begin())] += n;
        }
    }
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < groups.size(); ++i)
        rows.push_back({join_set(groups[i].first) + " mod " + std::to_string(t.m),
                        join_set(groups[i].second) + " mod " + std::to_string(t.N), std::to_string(counts[i])});
    std::ostringstream os;
    os << md_table({"\\|E_p(F_p)\\| mod m", "p", "primes"}, rows);
    os << "\nprimes <= " << t.X << ": " << t.total << " surveyed, " << t.skipped_bad << " bad, "
       << t.skipped_excluded << " excluded\n";
    return os.str();
}

std::string to_markdown(const ScanReport& r, const ExpectedTable* exp) {
    std::ostringstream os;
    if (!r.name.empty()) os << "### " << r.name << "\n\n";
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < r.rows.size(); ++i) {
        const auto& rd = r.rows[i];
        std::string allowed = exp && i < exp->rows.size()
                                  ? join_set(exp->rows[i].allowed) + " mod " + std::to_string(exp->m)
                                  : std::string();
        std::string cls = join_set(rd.classes) + (exp ? " mod " + std::to_string(exp->a) : "");
        std::string obs;
        for (const auto& [t, d] : rd.by_residue) {
            if (!obs.empty()) obs += ", ";
            obs += std::to_string(t) + ": " + rat_str(d.exact) + " = " + fmt_double(d.value);
        }
        rows.push_back({allowed, cls, std::to_string(rd.primes), obs});
    }
    if (!rows.empty())
        os << md_table({"\\|E_p(F_p)\\| mod m", "p", "primes", "density of observed residues"}, rows) << '\n';
    os << "matched " << r.matched << ", unmatched " << r.unmatched << ", violations " << r.violations.size()
       << ": " << (r.pass ? "PASS" : "FAIL") << '\n';
    if (!r.violations.empty()) {
        std::vector<std::vector<std::string>> vr;
        for (const auto& v : r.violations)
            vr.push_back({std::to_string(v.p), v.N.get_str(), std::to_string(v.t), std::to_string(v.s),
                          render_set(v.allowed)});
        os << '\n' << md_table({"p", "N_p", "N_p mod m", "p mod N", "allowed"}, vr);
    }
    for (const auto& n : r.notes) os << "\nnote: " << n;
    if (!r.notes.empty()) os << '\n';
    return os.str();
}

}  // namespace ecred

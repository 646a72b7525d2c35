#pragma once

#include "ecred/arith.hpp"
#include "ecred/curve.hpp"
#include "ecred/reduction.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ecred {

struct SurveySpec {
    long m = 2;  // modulus for N_p
    long N = 1;  // modulus for p
    u64 X = 0;
    std::set<u64> exclusions;  // extra primes to skip
    Int d = 0;                 // nonzero: also skip p | d
    bool auto_exclude = true;  // skip p | 2 d m N
    unsigned threads = 1;

    /// Throws InputError unless m >= 1, N >= 1, X >= 2, threads >= 1.
    void validate() const;
    bool excluded(u64 p) const;
};

struct PrimeRecord {
    u64 p = 0;
    Int N;
    long s = 0;  // p mod N
    long t = 0;  // N_p mod m
};

struct CongruenceTable {
    long m = 1;
    long N = 1;
    u64 X = 0;
    std::map<long, std::map<long, u64>> buckets;  // s -> t -> count
    std::vector<PrimeRecord> records;             // ascending p
    u64 total = 0;
    u64 skipped_bad = 0;
    u64 skipped_excluded = 0;

    friend bool operator==(const CongruenceTable& a, const CongruenceTable& b);
};

/// Buckets N_p mod m under p mod N over good, non-excluded p <= X. Chunks of the prime
/// range are processed on `threads` workers and merged in prime order.
CongruenceTable congruence_survey(const Curve& c, const SurveySpec& spec);

struct ExpectedRow {
    std::set<long> classes;  // residues s mod a
    std::set<long> allowed;  // residues t mod m
};

struct ExpectedTable {
    long m = 1;
    long a = 1;
    std::vector<ExpectedRow> rows;

    /// Throws InputError on an empty allowed set or a class listed twice.
    void validate() const;
    const ExpectedRow* row_for(long s) const;
};

struct Violation {
    u64 p = 0;
    Int N;
    long t = 0;
    long s = 0;
    std::set<long> allowed;
};

struct Density {
    Rat exact;
    double value = 0.0;
    u64 count = 0;
    u64 total = 0;
};

struct RowDensity {
    std::set<long> classes;
    u64 primes = 0;
    std::map<long, Density> by_residue;  // observed residues within the row
};

struct ScanReport {
    std::string name;
    u64 matched = 0;    // primes falling in an expected row
    u64 unmatched = 0;  // primes whose class has no row
    std::vector<Violation> violations;
    std::vector<RowDensity> rows;
    std::vector<std::string> notes;
    bool pass = true;
};

/// Moduli must match (table.m == exp.m, table.N == exp.a).
ScanReport verify_expected(const CongruenceTable& table, const ExpectedTable& exp);

/// count(s, t) / total; s empty means every class. Throws InputError on an empty table.
Density empirical_density(const CongruenceTable& table, std::optional<long> s, long t);

/// gcd over p <= X of N_p (good p) and m_p (bad p, when include_bad); stops at 1.
Int gcd_orders(const Curve& c, u64 X, bool include_bad = true);

/// gcd over odd unramified good p <= X of the counts at the primes above p.
Int gcd_orders_quadratic(const Curve& c, const Int& d, u64 X);
Int gcd_orders_quadratic(const CurveK& c, u64 X);

struct ResidueHit {
    u64 p = 0;
    std::vector<long> residues;  // p mod each requested modulus
};

/// Good p in [5, X] with a_p = 0.
std::vector<ResidueHit> scan_supersingular(const Curve& c, u64 X, const std::vector<long>& moduli);

/// Good p <= X with p | N_p.
std::vector<ResidueHit> scan_anomalous(const Curve& c, u64 X, long modulus);

/// Checks the divisibility each family guarantees on its qualifying primes:
/// family3, kkp: 3 | N_p; family5: 5 | N_p where (t/p) = 1; kubert5, e1k, e2k: 5 | N_p.
ScanReport verify_family(Family family, const std::vector<FamilyParam>& params, u64 X);

/// Whether p qualifies for the family statement at parameter fp (good reduction is checked separately).
bool family_prime_qualifies(const FamilyParam& fp, u64 p);

struct KubertVerdict {
    bool accepted = false;
    std::string reason;  // "singular", "no z_T", "psi nonzero", or "ok"
    std::optional<u64> z;
    std::optional<u64> count;
    bool divisible = false;
};

/// Order-`order` point test at x = T on E_A over F_p: conditions (i) Delta != 0,
/// (ii) a point (T, z) exists, and psi_order(T) = 0. On acceptance, counts E_A(F_p).
/// order defaults to p. p odd and <= 31.
KubertVerdict check_kubert_conditions(const std::array<u64, 5>& A, u64 T, u64 p, u64 order = 0);

// Report emitters; all are deterministic.
nlohmann::ordered_json to_json(const CongruenceTable& t);
nlohmann::ordered_json to_json(const ScanReport& r);
std::string to_csv(const CongruenceTable& t);
std::string to_csv(const ScanReport& r);
std::string to_markdown(const CongruenceTable& t);
std::string to_markdown(const ScanReport& r, const ExpectedTable* exp = nullptr);

std::string render_set(const std::set<long>& s);

}  // namespace ecred

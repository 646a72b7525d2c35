#pragma once

#include "ecred/catalog.hpp"
#include "ecred/survey.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ecred {

constexpr int kReportSchemaVersion = 1;

enum ExitCode { kExitOk = 0, kExitVerificationFailed = 1, kExitUsage = 2, kExitResource = 3 };

/// Runs one subcommand; args excludes the program name. Data goes to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct CorpusRowResult {
    std::string label;
    std::string curve;
    ExpectedTable expected;
    ScanReport scan;
    std::string torsion_Q;           // computed
    std::string torsion_Q_expected;  // table column
    bool torsion_Q_ok = false;
    Int odd_K;           // odd part of |E(K)_tors| computed from E(Q) and E^D(Q)
    Int odd_K_expected;  // odd part of the table column
    Int bound_K;         // gcd of counts over odd unramified good primes
    bool bound_ok = false;  // 2-part of the table column divides bound_K
    bool phi2_ok = false;   // the (E(Q), E(K)) pair is a listed growth
    bool pass = false;
};

struct CorpusReport {
    u64 X = 0;
    std::vector<CorpusRowResult> rows;
    bool pass = false;
};

/// Verifies every congruence-table row against curves resolved through cfg.
/// `perturb` names a row whose first allowed set is shifted by one (negative control).
CorpusReport corpus_verify(u64 X, const ResolverConfig& cfg, unsigned threads = 1,
                           const std::optional<std::string>& perturb = std::nullopt);

}  // namespace ecred

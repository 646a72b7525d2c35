#pragma once

#include "ecred/curve.hpp"
#include "ecred/survey.hpp"
#include "ecred/torsion.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace ecred {

/// Parses "[a1,a2,a3,a4,a6]" with integer or fraction entries. ParseError carries the
/// offending offset; a zero discriminant throws SingularModelError.
Curve parse_curve(const std::string& s);

enum class Source { builtin, resolver, user };
std::string to_string(Source s);

struct CurveRecord {
    std::string id;  // stable corpus key
    std::optional<std::string> label;
    std::optional<AInvariants> ainvs;  // empty for label-only stubs
    Source source = Source::builtin;
    std::string description;
    std::vector<std::string> flags;  // "needs-resolution", "corrected-model", "as-printed", "label-shim"

    std::optional<FamilyParam> family;
    std::optional<CurveK> curve_k;
    std::optional<Int> expected_gcd;
    std::optional<TorsionGroup> torsion_Q;
    std::optional<TorsionGroup> torsion_K;
    std::optional<Int> D;
    std::optional<ExpectedTable> expected;

    bool needs_resolution() const { return !ainvs && !curve_k; }
    bool has_flag(const std::string& f) const;
    /// Throws InputError for stubs and curves over Q(sqrt d).
    Curve curve() const;
};

/// Every built-in curve, in a fixed order. Table rows are label-only stubs.
const std::vector<CurveRecord>& builtin_corpus();

/// The 24 congruence-table rows, in table order.
std::vector<const CurveRecord*> table_rows();

/// Corpus entry by id; nullptr when absent.
const CurveRecord* corpus_entry(const std::string& id);

// Label resolution.

struct ParsedLabel {
    Int conductor;
    std::string isogeny_class;
    long index = 0;
    bool lmfdb_style = false;  // "N.cI" accepted by the normalization shim
    std::string normalized;    // cache key
};

/// Accepts Cremona "50a3" (case and spaces ignored) and LMFDB-style "50.a3".
ParsedLabel parse_label(const std::string& label);

struct CacheEntry {
    std::string label;
    std::array<std::string, 5> ainvs;
    std::string fetched_at;  // ISO-8601 UTC
    std::string source;

    nlohmann::ordered_json to_json() const;
    /// Throws DataIntegrityError on a malformed document.
    static CacheEntry from_json(const nlohmann::json& j);
};

struct ResolverConfig {
    std::string cache_dir;
    /// Placeholders {label} and {field} ("Clabel" or "lmfdb_label").
    std::string url_template = "https://www.lmfdb.org/api/ec_curvedata/?{field}={label}&_format=json&_fields=ainvs";
    double timeout_s = 10.0;
    int retries = 3;
    int backoff_ms = 250;
    bool offline = false;

    /// ECRED_CACHE_DIR, ECRED_RESOLVER_URL, ECRED_RESOLVER_TIMEOUT; defaults to the shipped cache.
    static ResolverConfig from_env();
};

std::string default_cache_dir();

std::optional<CacheEntry> read_cache(const ResolverConfig& cfg, const std::string& normalized);
/// Write-temp-then-rename. An existing entry is left untouched.
void write_cache(const ResolverConfig& cfg, const CacheEntry& e);

/// Primes of bad reduction (conductor exponent > 0).
std::vector<Int> bad_primes(const Curve& c);
/// Product of p^f over the bad primes.
Int conductor(const Curve& c);

/// Cache first; otherwise HTTP GET with retries. Errors: ParseError (label syntax),
/// ResourceError (offline cache miss), NetworkError, NotFoundError, DataIntegrityError
/// (bad primes outside the label's conductor, malformed payload).
CurveRecord resolve_label(const std::string& label, const ResolverConfig& cfg);

/// The curve of a record, resolving table stubs through the cache.
Curve record_curve(const CurveRecord& r, const ResolverConfig& cfg);

}  // namespace ecred

#include "ecred/catalog.hpp"

#include "ecred/errors.hpp"
#include "ecred/reduction.hpp"

#include <httplib.h>

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#ifndef ECRED_DEFAULT_CACHE_DIR
#define ECRED_DEFAULT_CACHE_DIR "data/curve-cache"
#endif

namespace fs = std::filesystem;

namespace ecred {

// ---------------------------------------------------------------- parsing

namespace {

class CurveParser {
public:
    explicit CurveParser(const std::string& s) : s_(s) {}

    AInvariants run() {
        AInvariants a;
        skip_ws();
        expect('[');
        for (int i = 0; i < 5; ++i) {
            skip_ws();
            a[static_cast<size_t>(i)] = number();
            skip_ws();
            expect(i < 4 ? ',' : ']');
        }
        skip_ws();
        if (pos_ != s_.size()) throw ParseError("trailing characters after ']'", pos_);
        return a;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    void expect(char c) {
        if (pos_ >= s_.size()) throw ParseError(std::string("expected '") + c + "', found end of input", pos_);
        if (s_[pos_] != c) throw ParseError(std::string("expected '") + c + "', found '" + s_[pos_] + "'", pos_);
        ++pos_;
    }

    std::string digits() {
        size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) {
            if (pos_ >= s_.size()) throw ParseError("expected a digit, found end of input", pos_);
            throw ParseError(std::string("expected a digit, found '") + s_[pos_] + "'", pos_);
        }
        return s_.substr(start, pos_ - start);
    }

    Rat number() {
        std::string sign;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
            if (s_[pos_] == '-') sign = "-";
            ++pos_;
        }
        Int num(sign + digits());
        Int den = 1;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '/') {
            ++pos_;
            skip_ws();
            size_t at = pos_;
            den = Int(digits());
            if (den == 0) throw ParseError("zero denominator", at);
        }
        Rat q(num, den);
        q.canonicalize();
        return q;
    }

    const std::string& s_;
    size_t pos_ = 0;
};

}  // namespace

Curve parse_curve(const std::string& s) { return Curve(CurveParser(s).run()); }

std::string to_string(Source s) {
    switch (s) {
        case Source::builtin: return "builtin";
        case Source::resolver: return "resolver";
        case Source::user: return "user";
    }
    return "?";
}

bool CurveRecord::has_flag(const std::string& f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

Curve CurveRecord::curve() const {
    if (!ainvs) throw InputError("record " + id + " has no rational model");
    return Curve(*ainvs, family);
}

// ---------------------------------------------------------------- corpus

namespace {

std::set<long> long_set(const std::string& csv) {
    std::set<long> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.insert(std::stol(tok));
    return out;
}

// "1,4:0;2,3:0,1" -> rows of (classes : allowed)
ExpectedTable expected_of(long m, long a, const std::string& rows) {
    ExpectedTable t{m, a, {}};
    std::stringstream ss(rows);
    std::string row;
    while (std::getline(ss, row, ';')) {
        auto colon = row.find(':');
        t.rows.push_back({long_set(row.substr(0, colon)), long_set(row.substr(colon + 1))});
    }
    t.validate();
    return t;
}

AInvariants ints(long a1, long a2, long a3, long a4, long a6) {
    return {Rat(a1), Rat(a2), Rat(a3), Rat(a4), Rat(a6)};
}

struct TableRowSpec {
    const char* label;
    const char* over_Q;
    const char* over_K;
    long D;
    long m;
    long a;
    const char* rows;
};

// Congruence table: label, E(Q)_tors, E(K)_tors, D, m, a, rows.
const TableRowSpec kTable[] = {
    {"175b2", "0", "Z/3", 5, 3, 5, "1,4:0;2,3:0,1"},
    {"75a2", "0", "Z/5", 5, 5, 5, "1,4:0;2:1;3:3"},
    {"208d1", "0", "Z/7", -1, 7, 4, "1:0;3:0,1,3,4,5,6"},
    {"54a2", "0", "Z/9", -3, 9, 3, "1:0;2:0,3,6"},
    {"98a4", "Z/2", "Z/6", -7, 6, 7, "1,2,4:0;3,5,6:0,4"},
    {"2880r6", "Z/2", "Z/8", -6, 8, 24, "1,5,7,11,19,23:0;13,17:4"},
    {"150b3", "Z/2", "Z/10", 5, 10, 5, "1,4:0;2:6;3:8"},
    {"3150bk1", "Z/2", "Z/16", -15, 16, 15, "1,2,4,8:0;7,11,13,14:0,4,8,12"},
    {"14a3", "Z/2", "Z/2 x Z/2", -7, 4, 7, "1,2,4:0;3,5,6:0,2"},
    {"36a3", "Z/2", "Z/2 x Z/6", -3, 12, 3, "1:0;2:0,6"},
    {"450a3", "Z/2", "Z/2 x Z/10", -15, 20, 15, "1,2,4,8:0;7:6,16;11:4,14;13:8,18;14:0,10"},
    {"50a3", "Z/3", "Z/15", 5, 15, 5, "1,4:0;3:3;2:6"},
    {"19a1", "Z/3", "Z/3 x Z/3", -3, 9, 3, "1:0;2:0,3,6"},
    {"17a1", "Z/4", "Z/2 x Z/4", -1, 8, 4, "1:0;3:0,4"},
    {"192c6", "Z/4", "Z/2 x Z/8", -2, 16, 8, "1,3:0;5:4,12;7:0,8"},
    {"150c3", "Z/4", "Z/2 x Z/12", -15, 24, 15, "1,2,4,8:0;11,14:0,12;7,13:4,16"},
    {"50b1", "Z/5", "Z/15", 5, 15, 5, "1,4:0;2,3:0,10"},
    {"14a4", "Z/6", "Z/2 x Z/6", -7, 12, 7, "1,2,4:0;3,5,6:0,6"},
    {"14a1", "Z/6", "Z/3 x Z/6", -3, 18, 3, "1:0;2:0,6,12"},
    {"15a4", "Z/8", "Z/2 x Z/8", -1, 16, 4, "1:0;3:0,8"},
    {"63a2", "Z/2 x Z/2", "Z/2 x Z/8", -3, 16, 3, "1:0;2:0,4,8,12"},
    {"960o6", "Z/2 x Z/2", "Z/2 x Z/12", 6, 24, 24, "1,5,19,23:0;7,13:4,16;11,17:0,12"},
    {"15a3", "Z/2 x Z/4", "Z/2 x Z/8", 5, 16, 5, "1,4:0;2,3:0,8"},
    {"90c6", "Z/2 x Z/6", "Z/2 x Z/12", 6, 24, 24, "1,5,19,23:0;7,11,13,17:0,12"},
};

CurveK sqrt6_curve() {
    Int d = 6;
    QuadInt zero = QuadInt::integer(0, d);
    return {d, {QuadInt(8, -3, d), zero, QuadInt(49, -20, d), zero, zero}};
}

CurveK sqrt33_curve() {
    Int d = 33;
    QuadInt u(-462, -84, d);
    QuadInt u2 = u * u;
    Int j0 = -32 * 32 * 32 - 1728;
    QuadInt zero = QuadInt::integer(0, d);
    return {d, {zero, zero, zero, u2 * 96 * j0.get_si(), QuadInt::integer(-2 * j0 * j0, d) * u2 * u}};
}

std::vector<CurveRecord> build_corpus() {
    std::vector<CurveRecord> out;
    auto add = [&](std::string id, std::optional<AInvariants> a, std::string desc) -> CurveRecord& {
        CurveRecord r;
        r.id = std::move(id);
        r.ainvs = std::move(a);
        r.description = std::move(desc);
        out.push_back(std::move(r));
        return out.back();
    };
    auto family = [&](std::string id, FamilyParam fp, std::string desc) -> CurveRecord& {
        Curve c = make_family(fp);
        CurveRecord& r = add(std::move(id), c.a(), std::move(desc));
        r.family = fp;
        return r;
    };

    // CM curve with supersingular primes p = 2 mod 3
    {
        auto& r = add("cm-eD-1", ints(0, -6, 0, -3, 0), "y^2 = x^3 - 6Dx^2 - 3D^2x with D = 1");
        r.expected = expected_of(6, 6, "5:0;1:0,4");
    }

    // one-parameter families at sample parameters
    family("kkp-t1", {Family::kkp, 1}, "3 | N_p family at t = 1");
    family("family3-t1", {Family::family3, 1}, "3 | N_p family at t = 1");
    family("family3-t2", {Family::family3, 2}, "3 | N_p family at t = 2");
    family("family5-t1", {Family::family5, 1}, "5 | N_p family at t = 1");
    family("family5-t2", {Family::family5, 2}, "5 | N_p family at t = 2");
    family("kubert5-l1", {Family::kubert5, 1}, "order-5 Kubert curve at lambda = 1").expected_gcd = 1;
    add("kubert5-alt11", ints(2, 1, 1, 0, 0), "second lambda-unit model, split at 11").expected_gcd = 1;
    family("e1k-k1+", {Family::e1k, 0, 1, 1}, "E^1_k, k = 1, eps = +1");
    family("e1k-k1-", {Family::e1k, 0, 1, -1}, "E^1_k, k = 1, eps = -1");
    family("e2k-k1+", {Family::e2k, 0, 1, 1}, "E^2_k, k = 1, eps = +1");
    family("e2k-k1-", {Family::e2k, 0, 1, -1}, "E^2_k, k = 1, eps = -1");

    // gcd of orders over Q
    {
        auto& r = add("gcd-2", ints(1, -1, 1, -199, 510), "gcd of orders 2");
        r.expected_gcd = 2;
    }
    {
        auto& r = add("gcd-3", ints(0, 1, 0, -333, -3537), "gcd of orders 3, torsion Z/3");
        r.expected_gcd = 3;
        r.torsion_Q = parse_torsion_structure("Z/3");
    }
    {
        auto& r = add("gcd-4", ints(1, -1, 0, -1773, -5720), "gcd of orders 4, torsion Z/2 x Z/2 (441c2)");
        r.label = "441c2";
        r.expected_gcd = 4;
        r.torsion_Q = parse_torsion_structure("Z/2 x Z/2");
        r.flags.push_back("corrected-model");
    }
    {
        auto& r = add("gcd-4-printed", ints(1, -1, 0, -1773, -5270), "model as printed for the gcd-4 example");
        r.flags.push_back("as-printed");
    }
    add("gcd-2-cond-p2-a", ints(1, -1, 0, -37, -78), "conductor p^2, gcd 2").expected_gcd = 2;
    add("gcd-2-cond-p2-b", ints(-1, -1, 0, -2, -1), "conductor p^2, gcd 2").expected_gcd = 2;

    // everywhere-good curves over quadratic fields
    {
        CurveRecord r;
        r.id = "quad-sqrt33";
        r.description = "everywhere good over Q(sqrt 33), torsion Z/3";
        r.curve_k = sqrt33_curve();
        r.expected_gcd = 3;
        r.D = 33;
        r.torsion_K = parse_torsion_structure("Z/3");
        out.push_back(std::move(r));
    }
    {
        CurveRecord r;
        r.id = "quad-sqrt6";
        r.description = "everywhere good over Q(sqrt 6), torsion Z/6";
        r.curve_k = sqrt6_curve();
        r.expected_gcd = 6;
        r.D = 6;
        r.torsion_K = parse_torsion_structure("Z/6");
        out.push_back(std::move(r));
    }

    // congruence examples
    {
        auto& r = add("mod12", ints(0, 0, 0, -12, -11), "0 or 6 mod 12 by p mod 20");
        r.expected = expected_of(12, 20, "1,9,11,13,17,19:0;3,7:6");
    }
    {
        auto& r = add("mod12-isogenous", ints(0, 0, 0, -372, 2761), "isogenous curve with torsion Z/6");
        r.torsion_Q = parse_torsion_structure("Z/6");
    }
    {
        auto& r = add("z10", ints(1, 1, 0, -700, 34000), "Z/2 over Q, Z/10 over Q(sqrt 5)");
        r.torsion_Q = parse_torsion_structure("Z/2");
        r.torsion_K = parse_torsion_structure("Z/10");
        r.D = 5;
        r.expected = expected_of(10, 5, "1,4:0;2:6;3:8");
    }
    {
        auto& r = add("z16", ints(1, -1, 1, 47245, -2990253), "Z/2 over Q, Z/16 over Q(sqrt -15)");
        r.torsion_Q = parse_torsion_structure("Z/2");
        r.torsion_K = parse_torsion_structure("Z/16");
        r.D = -15;
        r.expected = expected_of(16, 15, "1,2,4,8:0;7,11,13,14:0,4,8,12");
    }
    {
        auto& r = add("z16-isogenous", ints(1, -1, 1, -240755, -26606253), "isogenous curve, Z/2 x Z/2");
        r.torsion_Q = parse_torsion_structure("Z/2 x Z/2");
    }
    {
        auto& r = add("z8", ints(0, 0, 0, 20148, 586096), "Z/2 over Q, Z/8 over Q(sqrt -6)");
        r.torsion_Q = parse_torsion_structure("Z/2");
        r.torsion_K = parse_torsion_structure("Z/8");
        r.D = -6;
        r.expected = expected_of(8, 24, "1,5,7,11,19,23:0;13,17:4");
    }

    // table rows: label-only
    for (const auto& t : kTable) {
        CurveRecord r;
        r.id = std::string("table-") + t.label;
        r.label = t.label;
        r.description = std::string("table row ") + t.label;
        r.flags.push_back("needs-resolution");
        r.torsion_Q = parse_torsion_structure(t.over_Q);
        r.torsion_K = parse_torsion_structure(t.over_K);
        r.D = t.D;
        r.expected = expected_of(t.m, t.a, t.rows);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

const std::vector<CurveRecord>& builtin_corpus() {
    static const std::vector<CurveRecord> corpus = build_corpus();
    return corpus;
}

std::vector<const CurveRecord*> table_rows() {
    std::vector<const CurveRecord*> out;
    for (const auto& r : builtin_corpus())
        if (r.id.rfind("table-", 0) == 0) out.push_back(&r);
    return out;
}

const CurveRecord* corpus_entry(const std::string& id) {
    for (const auto& r : builtin_corpus())
        if (r.id == id) return &r;
    return nullptr;
}

// ---------------------------------------------------------------- labels and cache

ParsedLabel parse_label(const std::string& label) {
    std::string s;
    for (char ch : label)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    static const std::regex cremona(R"(^([1-9][0-9]*)([a-z]+)([1-9][0-9]*)$)");
    static const std::regex lmfdb(R"(^([1-9][0-9]*)\.([a-z]+)([1-9][0-9]*)$)");
    std::smatch m;
    ParsedLabel out;
    if (std::regex_match(s, m, cremona)) {
        out.normalized = s;
    } else if (std::regex_match(s, m, lmfdb)) {
        out.lmfdb_style = true;
        out.normalized = "lmfdb-" + s;
    } else {
        size_t pos = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == 0) throw ParseError("label '" + label + "' must start with conductor digits", 0);
        throw ParseError("label '" + label + "' is not of the form <conductor><class><index>", pos);
    }
    out.conductor = Int(m[1].str());
    out.isogeny_class = m[2].str();
    out.index = std::stol(m[3].str());
    return out;
}

nlohmann::ordered_json CacheEntry::to_json() const {
    nlohmann::ordered_json j;
    j["label"] = label;
    j["ainvs"] = ainvs;
    j["fetched_at"] = fetched_at;
    j["source"] = source;
    return j;
}

CacheEntry CacheEntry::from_json(const nlohmann::json& j) {
    try {
        CacheEntry e;
        e.label = j.at("label").get<std::string>();
        const auto& a = j.at("ainvs");
        if (!a.is_array() || a.size() != 5) throw DataIntegrityError("cache entry: ainvs must have 5 entries");
        for (size_t i = 0; i < 5; ++i) e.ainvs[i] = a[i].get<std::string>();
        e.fetched_at = j.at("fetched_at").get<std::string>();
        e.source = j.at("source").get<std::string>();
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw DataIntegrityError(std::string("malformed cache entry: ") + ex.what());
    }
}

std::string default_cache_dir() { return ECRED_DEFAULT_CACHE_DIR; }

ResolverConfig ResolverConfig::from_env() {
    ResolverConfig cfg;
    cfg.cache_dir = default_cache_dir();
    if (const char* v = std::getenv("ECRED_CACHE_DIR"); v && *v) cfg.cache_dir = v;
    if (const char* v = std::getenv("ECRED_RESOLVER_URL"); v && *v) cfg.url_template = v;
    if (const char* v = std::getenv("ECRED_RESOLVER_TIMEOUT"); v && *v) {
        try {
            cfg.timeout_s = std::stod(v);
        } catch (const std::exception&) {
            throw InputError(std::string("ECRED_RESOLVER_TIMEOUT is not a number: ") + v);
        }
    }
    return cfg;
}

namespace {

fs::path cache_path(const ResolverConfig& cfg, const std::string& normalized) {
    return fs::path(cfg.cache_dir) / (normalized + ".json");
}

std::mutex& label_mutex(const std::string& key) {
    static std::mutex map_mu;
    static std::map<std::string, std::unique_ptr<std::mutex>> mutexes;
    std::lock_guard<std::mutex> lock(map_mu);
    auto& m = mutexes[key];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
}

std::string now_iso8601() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) s.replace(pos, from.size(), to);
    return s;
}

std::string lmfdb_form(const ParsedLabel& l) {
    return l.conductor.get_str() + "." + l.isogeny_class + std::to_string(l.index);
}

std::string json_scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return v.dump();
    throw DataIntegrityError("resolver payload: a-invariant is not an integer");
}

// Extracts a-invariants from {"data":[{"ainvs":[...]}]} or {"ainvs":[...]}.
std::optional<std::array<std::string, 5>> extract_ainvs(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& ex) {
        throw DataIntegrityError(std::string("resolver payload is not JSON: ") + ex.what());
    }
    const nlohmann::json* rec = &j;
    if (j.is_object() && j.contains("data")) {
        const auto& d = j["data"];
        if (!d.is_array()) throw DataIntegrityError("resolver payload: 'data' is not a list");
        if (d.empty()) return std::nullopt;
        rec = &d[0];
    }
    if (!rec->is_object() || !rec->contains("ainvs")) throw DataIntegrityError("resolver payload has no 'ainvs'");
    const auto& a = (*rec)["ainvs"];
    if (!a.is_array() || a.size() != 5) throw DataIntegrityError("resolver payload: ainvs must have 5 entries");
    std::array<std::string, 5> out;
    for (size_t i = 0; i < 5; ++i) out[i] = json_scalar(a[i]);
    return out;
}

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string target;  // path?query
};

Url split_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw InputError("resolver URL must be http(s)://host/path: " + url);
    return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

std::string fetch(const ResolverConfig& cfg, const std::string& url) {
    Url u = split_url(url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (u.origin.rfind("https", 0) == 0) throw NetworkError("built without TLS support; cannot fetch " + url);
#endif
    std::string last_error;
    for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(cfg.backoff_ms << (attempt - 1)));
        httplib::Client cli(u.origin);
        auto secs = static_cast<time_t>(cfg.timeout_s);
        auto usecs = static_cast<time_t>((cfg.timeout_s - static_cast<double>(secs)) * 1e6);
        cli.set_connection_timeout(secs, usecs);
        cli.set_read_timeout(secs, usecs);
        cli.set_follow_location(true);
        auto res = cli.Get(u.target);
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) return res->body;
        if (res->status == 404) throw NotFoundError("resolver returned 404 for " + url);
        last_error = "HTTP " + std::to_string(res->status);
        if (res->status < 500 && res->status != 429) throw NetworkError(last_error + " for " + url);
    }
    throw NetworkError("resolver unreachable after " + std::to_string(cfg.retries + 1) + " attempts (" + last_error +
                       "): " + url);
}

AInvariants ainvs_of(const std::array<std::string, 5>& s) {
    AInvariants a;
    for (size_t i = 0; i < 5; ++i) {
        try {
            a[i] = Rat(Int(s[i]));
        } catch (const std::invalid_argument&) {
            throw DataIntegrityError("a-invariant '" + s[i] + "' is not an integer");
        }
    }
    return a;
}

CurveRecord record_from(const ParsedLabel& l, const CacheEntry& e) {
    AInvariants a = ainvs_of(e.ainvs);
    Curve c = [&] {
        try {
            return Curve(a);
        } catch (const SingularModelError&) {
            throw DataIntegrityError("resolved model for " + e.label + " is singular");
        }
    }();
    for (const Int& q : bad_primes(c))
        if (l.conductor % q != 0)
            throw DataIntegrityError("resolved curve for " + e.label + " has bad prime " + q.get_str() +
                                     " not dividing the conductor " + l.conductor.get_str());
    CurveRecord r;
    r.id = "resolved-" + l.normalized;
    r.label = e.label;
    r.ainvs = a;
    r.source = Source::resolver;
    r.description = "resolved from " + e.source;
    if (l.lmfdb_style) r.flags.push_back("label-shim");
    return r;
}

}  // namespace

std::optional<CacheEntry> read_cache(const ResolverConfig& cfg, const std::string& normalized) {
    fs::path p = cache_path(cfg, normalized);
    std::ifstream in(p);
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
        throw DataIntegrityError("cache file " + p.string() + " is not JSON: " + ex.what());
    }
    return CacheEntry::from_json(j);
}

void write_cache(const ResolverConfig& cfg, const CacheEntry& e) {
    ParsedLabel l = parse_label(e.label);
    fs::path dir(cfg.cache_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    fs::path final_path = cache_path(cfg, l.normalized);
    if (fs::exists(final_path)) return;
    std::ostringstream tmpname;
    tmpname << '.' << l.normalized << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id());
    fs::path tmp = dir / tmpname.str();
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw ResourceError("cannot write cache file in " + dir.string());
        out << e.to_json().dump(2) << '\n';
        if (!out) throw ResourceError("failed writing " + tmp.string());
    }
    fs::rename(tmp, final_path, ec);
    if (ec) {
        fs::remove(tmp);
        throw ResourceError("cannot install cache file " + final_path.string() + ": " + ec.message());
    }
}

std::vector<Int> bad_primes(const Curve& c) {
    std::vector<Int> out;
    for (const auto& [q, e] : factor(c.integral_discriminant()).factors) {
        (void)e;
        if (local_data(c, q).conductor_exponent > 0) out.push_back(q);
    }
    return out;
}

Int conductor(const Curve& c) {
    Int n = 1;
    for (const Int& q : bad_primes(c)) {
        long f = local_data(c, q).conductor_exponent;
        for (long i = 0; i < f; ++i) n *= q;
    }
    return n;
}

CurveRecord resolve_label(const std::string& label, const ResolverConfig& cfg) {
    ParsedLabel l = parse_label(label);
    std::lock_guard<std::mutex> lock(label_mutex(cfg.cache_dir + "\n" + l.normalized));
    if (auto e = read_cache(cfg, l.normalized)) return record_from(l, *e);
    if (cfg.offline)
        throw ResourceError("label " + l.normalized + " is not cached in " + cfg.cache_dir +
                            "; run once without --offline to fetch it, or point --cache-dir at a warm cache");
    std::string key = l.lmfdb_style ? lmfdb_form(l) : l.normalized;
    std::string url = replace_all(replace_all(cfg.url_template, "{label}", key), "{field}",
                                  l.lmfdb_style ? "lmfdb_label" : "Clabel");
    auto ainvs = extract_ainvs(fetch(cfg, url));
    if (!ainvs) throw NotFoundError("unknown label " + key);
    CacheEntry e{l.lmfdb_style ? lmfdb_form(l) : l.normalized, *ainvs, now_iso8601(), url};
    CurveRecord r = record_from(l, e);  // validate before caching
    write_cache(cfg, e);
    if (auto stored = read_cache(cfg, l.normalized)) return record_from(l, *stored);
    return r;
}

Curve record_curve(const CurveRecord& r, const ResolverConfig& cfg) {
    if (r.ainvs) return r.curve();
    if (!r.label) throw InputError("record " + r.id + " has neither a model nor a label");
    return resolve_label(*r.label, cfg).curve();
}

}  // namespace ecred

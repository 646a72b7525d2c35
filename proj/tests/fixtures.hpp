#pragma once

#include "ecred/curve.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fixtures {

inline std::vector<std::vector<std::string>> read_tsv(const std::string& name) {
    std::ifstream in(std::string(ECRED_TEST_DATA_DIR) + "/" + name);
    if (!in) throw std::runtime_error("missing fixture " + name);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, '\t')) cols.push_back(col);
        rows.push_back(cols);
    }
    return rows;
}

inline std::array<ecred::Int, 5> parse_ainvs(const std::string& s) {
    std::array<ecred::Int, 5> a;
    std::stringstream ss(s);
    std::string tok;
    for (int i = 0; i < 5; ++i) {
        std::getline(ss, tok, ',');
        a[i] = ecred::Int(tok);
    }
    return a;
}

inline ecred::Curve curve_from(const std::array<ecred::Int, 5>& a) {
    return ecred::Curve({ecred::Rat(a[0]), ecred::Rat(a[1]), ecred::Rat(a[2]), ecred::Rat(a[3]), ecred::Rat(a[4])});
}

/// a-invariants of a shipped cache entry.
inline ecred::Curve cached_curve(const std::string& label) {
    std::ifstream in(std::string(ECRED_CACHE_FIXTURE_DIR) + "/" + label + ".json");
    if (!in) throw std::runtime_error("missing cache entry " + label);
    auto j = nlohmann::json::parse(in);
    std::array<ecred::Int, 5> a;
    for (int i = 0; i < 5; ++i) a[i] = ecred::Int(j["ainvs"][i].get<std::string>());
    return curve_from(a);
}

}  // namespace fixtures

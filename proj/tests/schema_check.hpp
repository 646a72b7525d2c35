#pragma once

// Validator for the JSON Schema keywords used by docs/report.schema.json:
// type, const, enum, required, properties, items, minimum, $ref (local).

#include <json.hpp>

#include <string>
#include <vector>

namespace schema_check {

using nlohmann::json;

inline bool type_matches(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    if (t == "null") return v.is_null();
    return false;
}

inline const json& resolve_ref(const json& root, const std::string& ref) {
    if (ref.rfind("#/", 0) != 0) throw std::runtime_error("unsupported $ref " + ref);
    return root.at(json::json_pointer(ref.substr(1)));
}

inline void validate(const json& root, const json& schema, const json& v, const std::string& path,
                     std::vector<std::string>& errors) {
    if (schema.contains("$ref")) {
        validate(root, resolve_ref(root, schema["$ref"]), v, path, errors);
        return;
    }
    if (schema.contains("type")) {
        const json& t = schema["type"];
        bool ok = false;
        if (t.is_string()) ok = type_matches(v, t);
        else
            for (const auto& x : t) ok = ok || type_matches(v, x);
        if (!ok) {
            errors.push_back(path + ": expected type " + t.dump());
            return;
        }
    }
    if (schema.contains("const") && v != schema["const"]) errors.push_back(path + ": expected " + schema["const"].dump());
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& x : schema["enum"]) ok = ok || x == v;
        if (!ok) errors.push_back(path + ": " + v.dump() + " not in enum");
    }
    if (schema.contains("minimum") && v.is_number() && v.get<double>() < schema["minimum"].get<double>())
        errors.push_back(path + ": below minimum");
    if (v.is_object()) {
        if (schema.contains("required"))
            for (const auto& k : schema["required"])
                if (!v.contains(k.get<std::string>())) errors.push_back(path + ": missing " + k.get<std::string>());
        if (schema.contains("properties"))
            for (const auto& [k, sub] : schema["properties"].items())
                if (v.contains(k)) validate(root, sub, v[k], path + "/" + k, errors);
    }
    if (v.is_array() && schema.contains("items"))
        for (size_t i = 0; i < v.size(); ++i) validate(root, schema["items"], v[i], path + "/" + std::to_string(i), errors);
}

/// Checks the envelope and the command-specific result; returns the error list.
inline std::vector<std::string> validate_report(const json& schema, const json& report) {
    std::vector<std::string> errors;
    validate(schema, schema, report, "", errors);
    if (errors.empty()) {
        std::string def = "#/$defs/result-" + report["command"].get<std::string>();
        validate(schema, resolve_ref(schema, def), report["result"], "/result", errors);
    }
    return errors;
}

}  // namespace schema_check

#pragma once

// Subset of draft-07 used by the files in schemas/: type, enum, properties,
// required, additionalProperties, propertyNames, items, minItems, maxItems,
// minimum, maximum, anyOf, pattern and local $ref.

#include <cmath>
#include <fstream>
#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

namespace schema_check {

using nlohmann::json;

class Validator {
public:
    explicit Validator(json root) : root_(std::move(root)) {}

    static Validator from_file(const std::string& path) {
        std::ifstream is(path);
        return Validator(json::parse(is));
    }

    /// Empty when `doc` conforms, otherwise one message per violation.
    std::vector<std::string> errors(const json& doc) const {
        std::vector<std::string> out;
        check(root_, doc, "$", out);
        return out;
    }

private:
    const json& resolve(const json& s) const {
        if (!s.is_object() || !s.contains("$ref")) return s;
        const std::string ref = s["$ref"];
        return root_.at(json::json_pointer(ref.substr(1)));
    }

    static bool has_type(const json& v, const std::string& t) {
        if (t == "object") return v.is_object();
        if (t == "array") return v.is_array();
        if (t == "string") return v.is_string();
        if (t == "boolean") return v.is_boolean();
        if (t == "null") return v.is_null();
        if (t == "number") return v.is_number();
        if (t == "integer") {
            if (v.is_number_integer()) return true;
            return v.is_number_float() && std::floor(v.get<double>()) == v.get<double>();
        }
        return false;
    }

    void check(const json& schema, const json& v, const std::string& path, std::vector<std::string>& out) const {
        const json& s = resolve(schema);
        if (s.is_boolean()) {
            if (!s.get<bool>()) out.push_back(path + ": not allowed");
            return;
        }
        if (s.contains("type")) {
            bool ok = false;
            if (s["type"].is_string()) ok = has_type(v, s["type"]);
            else
                for (const auto& t : s["type"]) ok = ok || has_type(v, t);
            if (!ok) {
                out.push_back(path + ": expected " + s["type"].dump() + ", got " + v.dump());
                return;
            }
        }
        if (s.contains("enum")) {
            bool ok = false;
            for (const auto& e : s["enum"]) ok = ok || e == v;
            if (!ok) out.push_back(path + ": " + v.dump() + " not in " + s["enum"].dump());
        }
        if (s.contains("anyOf")) {
            bool ok = false;
            for (const auto& alt : s["anyOf"]) {
                std::vector<std::string> sub;
                check(alt, v, path, sub);
                ok = ok || sub.empty();
            }
            if (!ok) out.push_back(path + ": matches no alternative");
        }
        if (v.is_number()) {
            if (s.contains("minimum") && v.get<double>() < s["minimum"].get<double>()) out.push_back(path + ": below minimum");
            if (s.contains("maximum") && v.get<double>() > s["maximum"].get<double>()) out.push_back(path + ": above maximum");
        }
        if (v.is_string() && s.contains("pattern") &&
            !std::regex_search(v.get<std::string>(), std::regex(s["pattern"].get<std::string>())))
            out.push_back(path + ": does not match pattern");
        if (v.is_array()) {
            if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>()) out.push_back(path + ": too few items");
            if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>()) out.push_back(path + ": too many items");
            if (s.contains("items"))
                for (std::size_t i = 0; i < v.size(); ++i) check(s["items"], v[i], path + "[" + std::to_string(i) + "]", out);
        }
        if (v.is_object()) {
            if (s.contains("required"))
                for (const auto& k : s["required"])
                    if (!v.contains(k.get<std::string>())) out.push_back(path + ": missing " + k.get<std::string>());
            const json props = s.value("properties", json::object());
            for (const auto& [k, child] : v.items()) {
                const std::string p = path + "." + k;
                if (s.contains("propertyNames")) check(s["propertyNames"], json(k), p + " (name)", out);
                if (props.contains(k)) check(props[k], child, p, out);
                else if (s.contains("additionalProperties")) check(s["additionalProperties"], child, p, out);
            }
        }
    }

    json root_;
};

}  // namespace schema_check

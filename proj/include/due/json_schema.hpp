#pragma once

// Strict JSON field access that reports failures as SchemaError with a JSON
// path like `od_pairs[0].Q`.

#include <json.hpp>

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

namespace due::schema {

/// Syntax errors carry the line number of the offending byte.
nlohmann::json parse_document(const std::string& text);

/// Throws Error(Io) when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

class Object;

class Value {
public:
    Value(const nlohmann::json& json, std::string path) : json_(&json), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }
    const nlohmann::json& json() const noexcept { return *json_; }

    std::string as_string() const;
    double as_number() const;
    long long as_integer() const;
    bool as_bool() const;
    Object object() const;

private:
    const nlohmann::json* json_;
    std::string path_;
};

class Object {
public:
    /// Throws unless `json` is an object.
    Object(const nlohmann::json& json, std::string path);

    /// Rejects any key not listed.
    void allow_only(std::initializer_list<const char*> keys) const;

    bool has(const char* key) const;
    Value at(const char* key) const;  // required

    std::string string(const char* key) const { return at(key).as_string(); }
    double number(const char* key) const { return at(key).as_number(); }
    long long integer(const char* key) const { return at(key).as_integer(); }
    std::vector<Value> array(const char* key) const;

private:
    std::string child(const char* key) const;

    const nlohmann::json* json_;
    std::string path_;
};

}  // namespace due::schema

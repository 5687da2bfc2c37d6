#include "due/json_schema.hpp"

#include "due/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace due::schema {

nlohmann::json parse_document(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(e.byte, text.size()));
        const int line = 1 + static_cast<int>(std::count(text.begin(), end, '\n'));
        throw SchemaError("", "malformed JSON", line);
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string Value::as_string() const {
    if (!json_->is_string()) throw SchemaError(path_, "expected a string");
    return json_->get<std::string>();
}

double Value::as_number() const {
    if (!json_->is_number()) throw SchemaError(path_, "expected a number");
    const double v = json_->get<double>();
    if (!std::isfinite(v)) throw SchemaError(path_, "expected a finite number");
    return v;
}

long long Value::as_integer() const {
    if (!json_->is_number_integer()) throw SchemaError(path_, "expected an integer");
    return json_->get<long long>();
}

bool Value::as_bool() const {
    if (!json_->is_boolean()) throw SchemaError(path_, "expected true or false");
    return json_->get<bool>();
}

Object Value::object() const { return Object(*json_, path_); }

Object::Object(const nlohmann::json& json, std::string path) : json_(&json), path_(std::move(path)) {
    if (!json.is_object()) throw SchemaError(path_.empty() ? "<root>" : path_, "expected an object");
}

std::string Object::child(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
}

void Object::allow_only(std::initializer_list<const char*> keys) const {
    for (const auto& item : json_->items()) {
        const bool known = std::any_of(keys.begin(), keys.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known) throw SchemaError(child(item.key().c_str()), "unknown key");
    }
}

bool Object::has(const char* key) const { return json_->contains(key); }

Value Object::at(const char* key) const {
    const auto it = json_->find(key);
    if (it == json_->end()) throw SchemaError(child(key), "missing required field");
    return Value(*it, child(key));
}

std::vector<Value> Object::array(const char* key) const {
    const Value v = at(key);
    if (!v.json().is_array()) throw SchemaError(v.path(), "expected an array");
    std::vector<Value> out;
    std::size_t i = 0;
    for (const auto& item : v.json()) {
        out.emplace_back(item, v.path() + "[" + std::to_string(i++) + "]");
    }
    return out;
}

}  // namespace due::schema

#include "autonode/json_io.hpp"

#include <fstream>
#include <sstream>

#include "autonode/errors.hpp"

namespace autonode::json_io {

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

nlohmann::json read_file(const std::filesystem::path& path) {
  const std::string raw = read_text(path);
  try {
    return nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, dump(j));
}

const nlohmann::json& require(const nlohmann::json& obj, const char* key) {
  if (!obj.is_object()) throw SchemaError(std::string("expected object holding '") + key + "'");
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const nlohmann::json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

int require_int(const nlohmann::json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_number_integer()) throw SchemaError(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

double require_number(const nlohmann::json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_number()) throw SchemaError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace autonode::json_io

#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace autonode::json_io {

// Canonical textual form: sorted keys, two-space indent, trailing newline.
std::string dump(const nlohmann::json& j);

nlohmann::json read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const nlohmann::json& j);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& content);

// Field accessors that raise SchemaError with the offending key in the message.
const nlohmann::json& require(const nlohmann::json& obj, const char* key);
std::string require_string(const nlohmann::json& obj, const char* key);
int require_int(const nlohmann::json& obj, const char* key);
double require_number(const nlohmann::json& obj, const char* key);

}  // namespace autonode::json_io

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace pharmaharvest {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Streams the file; throws NotFound when it cannot be opened.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace pharmaharvest

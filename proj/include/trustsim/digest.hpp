#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace trustsim {

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// Whole-file read; throws std::runtime_error when the file cannot be opened.
std::string read_file(const std::filesystem::path &path);

}  // namespace trustsim

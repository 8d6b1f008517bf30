#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace masr {

// Lowercase hex SHA-256 of arbitrary bytes.
std::string sha256_hex(std::string_view bytes);

// Whole-file read. Throws Error{MissingImage} when the file does not exist
// and Error{Io} on read failures.
std::string read_file_bytes(const std::filesystem::path& path);

std::string base64_encode(std::string_view bytes);
// Throws Error{MalformedResponse} on invalid input.
std::string base64_decode(std::string_view text);

}  // namespace masr

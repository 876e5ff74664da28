#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace dprisk {

/// SHA-256 hex digest of a byte string.
std::string sha256_hex(std::string_view data);

/// SHA-256 hex digest of a file's contents. Throws InputError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

} // namespace dprisk

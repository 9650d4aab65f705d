#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace eaeval {

// SHA-256 as a lowercase hex string. Used for request cache keys and for
// the config/dataset digests recorded in run manifests.
std::string sha256_hex(std::string_view data);

// Digest of a file's raw bytes. Throws DataError if the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace eaeval

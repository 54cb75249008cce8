#pragma once

// UTF-8 and small text utilities shared by the corpus and scoring modules.
// Character offsets everywhere in the public API count Unicode scalar values.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace zeroprobe::text {

/// Decodes UTF-8; throws Error(Parse) on malformed input.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// Number of scalar values in a UTF-8 string.
std::size_t length(std::string_view utf8);

bool is_space(char32_t c);

/// Substring by scalar-value offsets [begin, end).
std::string slice(std::string_view utf8, std::size_t begin, std::size_t end);

/// 64-bit FNV-1a, stable across platforms (used for run metadata hashes).
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Fixed-point formatting without locale dependence.
std::string fixed(double v, int decimals);

/// Reads a whole file; throws Error(Io).
std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace zeroprobe::text

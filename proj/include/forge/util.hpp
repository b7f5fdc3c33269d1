#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

// Hashing

std::string sha256_hex(std::string_view data);

// Base64 (RFC 4648, padded)

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Text

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with_icase(std::string_view s, std::string_view prefix);

/// Collapses runs of ASCII whitespace into one space and trims.
std::string normalize_space(std::string_view s);

/// First `max_code_points` UTF-8 code points of `s`.
std::string utf8_clip(std::string_view s, std::size_t max_code_points);
std::size_t utf8_length(std::string_view s);

/// At most `max_words` whitespace-separated words, single-spaced.
std::string clip_words(std::string_view s, std::size_t max_words);

std::vector<std::string> split_words(std::string_view s);

// Files

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

// Randomness

/// SplitMix64 step; used to derive independent per-item seeds from a run seed.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Uniform integer in [0, n) from a 64-bit engine. Unlike
/// std::uniform_int_distribution the mapping is fixed across standard
/// libraries, which keeps sampling reproducible from a seed.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

/// Uniform real in [0, 1) with 53 random bits.
double uniform_unit(std::mt19937_64& rng);

/// UTC "YYYY-MM-DDTHH:MM:SSZ" for the current wall clock.
std::string utc_timestamp_now();

}  // namespace forge

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace topksum::io {

/// Reads a vector file in either supported format (auto-detected):
///  - text: one decimal float per line, UTF-8, '#' starts a comment;
///  - binary: magic "TKSVEC01", then a 64-bit little-endian length, then
///    that many little-endian IEEE-754 doubles.
/// Throws std::runtime_error with a line number on malformed text input.
std::vector<double> read_vector(const std::filesystem::path& path);

/// Writes the text format with round-trip-exact precision (17 significant
/// digits).
void write_vector_text(const std::filesystem::path& path,
                       std::span<const double> v);

/// Writes the binary format.
void write_vector_binary(const std::filesystem::path& path,
                         std::span<const double> v);

}  // namespace topksum::io

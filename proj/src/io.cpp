#include "topksum/io.hpp"

#include <bit>
#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace topksum::io {
namespace {

constexpr char kMagic[8] = {'T', 'K', 'S', 'V', 'E', 'C', '0', '1'};

uint64_t to_le64(uint64_t x) {
  if constexpr (std::endian::native == std::endian::little) {
    return x;
  } else {
    return __builtin_bswap64(x);
  }
}

double double_from_le(uint64_t bits) {
  bits = to_le64(bits);
  double d;
  std::memcpy(&d, &bits, sizeof(d));
  return d;
}

uint64_t double_to_le(double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, sizeof(bits));
  return to_le64(bits);
}

std::vector<double> read_binary(std::ifstream& in,
                                const std::filesystem::path& path) {
  in.seekg(8);
  uint64_t len_le = 0;
  if (!in.read(reinterpret_cast<char*>(&len_le), sizeof(len_le))) {
    throw std::runtime_error(path.string() + ": truncated binary header");
  }
  uint64_t len = to_le64(len_le);
  std::vector<double> v;
  v.reserve(len);
  for (uint64_t i = 0; i < len; ++i) {
    uint64_t bits = 0;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof(bits))) {
      throw std::runtime_error(path.string() + ": truncated binary payload");
    }
    v.push_back(double_from_le(bits));
  }
  return v;
}

}  // namespace

std::vector<double> read_vector(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  char head[8] = {};
  in.read(head, sizeof(head));
  if (in.gcount() == 8 && std::memcmp(head, kMagic, 8) == 0) {
    return read_binary(in, path);
  }
  in.clear();
  in.seekg(0);
  std::vector<double> v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) {
      line.erase(pos);
    }
    std::size_t b = line.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t\r\n");
    std::string tok = line.substr(b, e - b + 1);
    errno = 0;
    char* end = nullptr;
    double d = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": malformed value '" + tok + "'");
    }
    v.push_back(d);
  }
  return v;
}

void write_vector_text(const std::filesystem::path& path,
                       std::span<const double> v) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open");
  char buf[64];
  for (double d : v) {
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    out << buf << '\n';
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void write_vector_binary(const std::filesystem::path& path,
                         std::span<const double> v) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open");
  out.write(kMagic, sizeof(kMagic));
  uint64_t len = to_le64(static_cast<uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  for (double d : v) {
    uint64_t bits = double_to_le(d);
    out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace topksum::io

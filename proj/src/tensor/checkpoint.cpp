#include "ecosim/tensor/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "ecosim/core/errors.hpp"

namespace ecosim::tensor {

namespace {

constexpr char kMagic[8] = {'E', 'C', 'O', 'S', 'I', 'M', 'P', 'B'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
         (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
  for (double d : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
  }
}

void read_doubles(std::istream& in, std::vector<double>& v) {
  for (double& d : v) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
    std::memcpy(&d, &bits, 8);
  }
}

}  // namespace

void save_parameters(const ParameterStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("checkpoint: cannot write '" + path + "'");
  out.write(kMagic, 8);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(store.count()));
  for (int i = 0; i < store.count(); ++i) {
    const auto& b = store.block(i);
    write_u32(out, static_cast<std::uint32_t>(b.name.size()));
    out.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    write_u32(out, static_cast<std::uint32_t>(b.value.rows));
    write_u32(out, static_cast<std::uint32_t>(b.value.cols));
  }
  for (int i = 0; i < store.count(); ++i)
    write_doubles(out, store.block(i).value.data);
  if (!out) throw ConfigError("checkpoint: write failed for '" + path + "'");
}

void load_parameters(ParameterStore& store, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw ConfigError("checkpoint: bad magic in '" + path + "'");
  if (read_u32(in) != kVersion)
    throw ConfigError("checkpoint: unsupported version in '" + path + "'");
  std::uint32_t count = read_u32(in);
  if (count != static_cast<std::uint32_t>(store.count()))
    throw ConfigError("checkpoint: block count mismatch");
  for (int i = 0; i < store.count(); ++i) {
    const auto& b = store.block(i);
    std::uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    std::uint32_t rows = read_u32(in);
    std::uint32_t cols = read_u32(in);
    if (name != b.name || rows != static_cast<std::uint32_t>(b.value.rows) ||
        cols != static_cast<std::uint32_t>(b.value.cols))
      throw ConfigError("checkpoint: block '" + name + "' does not match model");
  }
  for (int i = 0; i < store.count(); ++i)
    read_doubles(in, store.block(i).value.data);
  if (!in) throw ConfigError("checkpoint: truncated file '" + path + "'");
}

}  // namespace ecosim::tensor

#include "keyfile.hpp"

#include <cstdio>
#include <memory>
#include <stdexcept>

namespace gbt::bench {

namespace {
struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

std::uint64_t le64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = v << 8 | p[i];
  return v;
}

void put_le64(unsigned char* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    p[i] = static_cast<unsigned char>(v & 0xFF);
    v >>= 8;
  }
}
}  // namespace

void write_keyfile(const std::string& path, std::span<const Key> keys) {
  File f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  unsigned char buf[8];
  put_le64(buf, keys.size());
  if (std::fwrite(buf, 1, 8, f.get()) != 8)
    throw std::runtime_error("short write to " + path);
  for (const Key k : keys) {
    put_le64(buf, k);
    if (std::fwrite(buf, 1, 8, f.get()) != 8)
      throw std::runtime_error("short write to " + path);
  }
}

std::vector<Key> read_keyfile(const std::string& path) {
  File f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fseek(f.get(), 0, SEEK_END);
  const long bytes = std::ftell(f.get());
  std::fseek(f.get(), 0, SEEK_SET);
  if (bytes < 8) throw std::runtime_error(path + ": missing count header");

  unsigned char buf[8];
  if (std::fread(buf, 1, 8, f.get()) != 8)
    throw std::runtime_error(path + ": short read");
  const std::uint64_t count = le64(buf);
  if (static_cast<std::uint64_t>(bytes) != 8 * (count + 1))
    throw std::runtime_error(path + ": byte length does not match count header");

  std::vector<Key> keys(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    if (std::fread(buf, 1, 8, f.get()) != 8)
      throw std::runtime_error(path + ": short read");
    keys[i] = le64(buf);
    if (keys[i] == kMaxKey)
      throw std::runtime_error(path + ": reserved key 2^64-1 at index " +
                               std::to_string(i));
  }
  return keys;
}

}  // namespace gbt::bench

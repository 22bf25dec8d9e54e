#pragma once

#include <span>
#include <string>
#include <vector>

#include "gbt/common.hpp"

namespace gbt::bench {

// Binary key file: little-endian 8-byte unsigned count, then count 8-byte
// unsigned keys. The loader rejects files whose byte length disagrees with
// the header and keys equal to the reserved sentinel.
void write_keyfile(const std::string& path, std::span<const Key> keys);
std::vector<Key> read_keyfile(const std::string& path);

}  // namespace gbt::bench

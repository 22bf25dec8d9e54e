#pragma once

#include <set>
#include <vector>

#include "gbt/common.hpp"

namespace gbt::bench {

// Sorted-set oracle for differential testing. Deliberately naive; its only
// job is to be obviously correct.
class ReferenceModel {
 public:
  bool insert(Key k) { return set_.insert(k).second; }
  bool erase(Key k) { return set_.erase(k) > 0; }
  bool contains(Key k) const { return set_.count(k) > 0; }

  std::uint64_t range_count(Key lo, Key hi) const {
    auto it = set_.lower_bound(lo);
    std::uint64_t n = 0;
    for (; it != set_.end() && *it <= hi; ++it) ++n;
    return n;
  }

  void range_keys(Key lo, Key hi, std::vector<Key>& out) const {
    for (auto it = set_.lower_bound(lo); it != set_.end() && *it <= hi; ++it)
      out.push_back(*it);
  }

  std::size_t size() const { return set_.size(); }

 private:
  std::set<Key> set_;
};

}  // namespace gbt::bench

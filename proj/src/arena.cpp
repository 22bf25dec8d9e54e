#include "gbt/arena.hpp"

#include <sys/mman.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace gbt::detail {

void* map_reservation(std::size_t bytes) {
  if (bytes == 0) bytes = 1;
  // Round up to 2 MB so the huge-page hint can apply to the whole range.
  constexpr std::size_t kHuge = 2u << 20;
  bytes = (bytes + kHuge - 1) & ~(kHuge - 1);
  void* p = ::mmap(nullptr, bytes, PROT_READ | PROT_WRITE,
                   MAP_PRIVATE | MAP_ANONYMOUS | MAP_NORESERVE, -1, 0);
  if (p == MAP_FAILED)
    throw std::runtime_error(std::string("mmap failed: ") + std::strerror(errno));
#ifdef MADV_HUGEPAGE
  ::madvise(p, bytes, MADV_HUGEPAGE);  // best effort
#endif
  return p;
}

void unmap_reservation(void* p, std::size_t bytes) {
  if (p == nullptr) return;
  if (bytes == 0) bytes = 1;
  constexpr std::size_t kHuge = 2u << 20;
  bytes = (bytes + kHuge - 1) & ~(kHuge - 1);
  ::munmap(p, bytes);
}

}  // namespace gbt::detail

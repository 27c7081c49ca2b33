#pragma once

// Training allocates and frees multi-megabyte jet buffers every iteration.
// With glibc defaults those go through mmap/munmap and every iteration pays
// the page faults again; keeping them on the heap roughly halves step time.

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace hcpinn {

/// Keeps large blocks on the heap. Process-wide; call once from main().
inline bool tune_allocator() {
#if defined(__GLIBC__)
  const bool a = mallopt(M_MMAP_THRESHOLD, 32 * 1024 * 1024) == 1;
  const bool b = mallopt(M_TRIM_THRESHOLD, 512 * 1024 * 1024) == 1;
  return a && b;
#else
  return false;
#endif
}

}  // namespace hcpinn

#pragma once

#include <cstdlib>
#include <string>

namespace expsplit {

/// Worker count for parallel regions, from EXPSPLIT_THREADS (default 1).
inline int thread_count() {
  const char* env = std::getenv("EXPSPLIT_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

}  // namespace expsplit

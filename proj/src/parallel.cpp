#include "hopfinf/parallel.hpp"

#include <algorithm>

namespace hopfinf {

namespace {
std::atomic<unsigned> g_limit{std::max(1u, std::min(8u, std::thread::hardware_concurrency()))};
}

void set_worker_limit(unsigned n) { g_limit = std::max(1u, n); }
unsigned worker_limit() { return g_limit; }

bool& detail::inside_worker() {
  thread_local bool flag = false;
  return flag;
}

}  // namespace hopfinf

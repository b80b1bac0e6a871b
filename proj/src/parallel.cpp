#include "nsfp/parallel.hpp"

#include <atomic>

namespace nsfp {

namespace {
std::atomic<int> worker_count{1};
}

void set_threads(int n) { worker_count = std::max(1, n); }
int threads() { return worker_count; }

} // namespace nsfp

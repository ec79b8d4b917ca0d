#include "parallel.hpp"

#include <cstdlib>
#include <string>

namespace spectral::detail {

int thread_count() {
  static const int count = [] {
    if (const char* env = std::getenv("SPECTRAL_THREADS")) {
      try {
        const int v = std::stoi(env);
        if (v > 0) return v;
      } catch (...) {
      }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }();
  return count;
}

}  // namespace spectral::detail

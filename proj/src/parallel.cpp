#include "distreg/parallel.hpp"

#include <cstdlib>
#include <string>

#include "distreg/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace distreg {

int configure_threads_from_env() {
  int requested = 0;
  if (const char* value = std::getenv(kThreadsEnvVar); value != nullptr && *value != '\0') {
    try {
      std::size_t used = 0;
      requested = std::stoi(value, &used);
      if (used != std::string(value).size() || requested < 0) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ConfigError(std::string(kThreadsEnvVar) + " must be a non-negative integer, got '" +
                        value + "'");
    }
  }
#ifdef _OPENMP
  if (requested > 0) omp_set_num_threads(requested);
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace distreg

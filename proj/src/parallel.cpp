#include "swnet/parallel.hpp"

#include <cstdlib>
#include <string>

#include "swnet/error.hpp"

namespace swnet {

std::size_t resolve_threads(std::optional<std::size_t> requested) {
  if (requested) {
    if (*requested == 0) throw Error(ErrorCode::kInvalidArgument, "threads must be >= 1");
    return *requested;
  }
  if (const char* env = std::getenv("SWNET_THREADS"); env != nullptr && *env != '\0') {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(env, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || env[pos] != '\0' || v == 0) {
      throw Error(ErrorCode::kInvalidArgument, std::string("bad SWNET_THREADS: ") + env);
    }
    return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace swnet

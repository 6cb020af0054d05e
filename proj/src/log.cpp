#include "vicfuse/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/spdlog.h>

namespace vicfuse {

void configure_logging() {
  spdlog::set_level(spdlog::level::warn);
  spdlog::set_pattern("[%l] %v");
  if (const char* env = std::getenv("VICFUSE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour explicit "off".
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

}  // namespace vicfuse

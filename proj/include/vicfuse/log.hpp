#pragma once

namespace vicfuse {

// Sets the global log level from VICFUSE_LOG (trace, debug, info, warn,
// error, off). Unset or unknown values leave the level at warn.
void configure_logging();

}  // namespace vicfuse

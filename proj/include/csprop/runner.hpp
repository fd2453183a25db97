// Batch driver behind the CLI: dispatches tasks and writes report files.
#pragma once

#include <iosfwd>

#include "csprop/formats.hpp"

namespace csprop {

/// Exit status: 0 success, 1 numerical failure (diagnostic rows in the
/// output carry the module error tag), 2 config error.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace csprop

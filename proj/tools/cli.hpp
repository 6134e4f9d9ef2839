#pragma once

namespace terraclass {

/// Entry point of the `terraclass` tool. Returns 0 on success, 1 on a usage
/// error and 2 on a data error. Logs go to stderr.
int run_cli(int argc, char** argv);

}  // namespace terraclass

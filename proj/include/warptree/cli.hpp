#pragma once

#include <ostream>

namespace warptree {

/// Entry point for the `warptree` tool. Errors are reported on `err` as a
/// single `ERROR:<code>:<message>` line with a nonzero return value.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace warptree

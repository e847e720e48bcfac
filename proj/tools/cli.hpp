#pragma once

#include <iosfwd>

namespace bsvm::cli {

/// Entry point behind the `bsvm` executable. Results go to `out`, logs and
/// diagnostics to `err`. Returns 0 on success, 1 for configuration or input
/// errors and 2 for numerical failures.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace bsvm::cli

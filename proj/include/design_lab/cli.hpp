#pragma once

#include <ostream>

namespace design_lab {

/// Exit codes: 0 all asserted criteria passed, 2 some criterion failed,
/// 1 usage or runtime error (error JSON on `err`).
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace design_lab

#pragma once

#include <iosfwd>

namespace lpsketch {

// Fast built-in property suite behind the `verify` CLI subcommand. Prints one
// line per check; returns false if any check fails.
bool run_verify(std::ostream& os);

}  // namespace lpsketch

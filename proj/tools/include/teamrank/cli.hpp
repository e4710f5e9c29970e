#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace teamrank {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// args excludes the program name. Results go to `out` (or --out), diagnostics to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace teamrank

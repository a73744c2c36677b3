#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace symcomplete::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

/// Runs the command line `args` (args[0] is the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count: SYMCOMPLETE_JOBS when set and valid, otherwise 1.
std::size_t default_jobs();

/// Rate encoded in a damaged file stem ("chair__dr05" -> 0.05); negative if absent.
double rate_from_stem(const std::string& stem);

/// Stem with any "__dr..." suffix removed.
std::string base_stem(const std::string& stem);

}  // namespace symcomplete::cli

#ifndef GAZECOMP_LOG_HPP
#define GAZECOMP_LOG_HPP

#include <cstddef>
#include <ostream>
#include <string_view>

namespace gazecomp {

// Diagnostics go to std::cerr unless redirected. Passing nullptr silences them.
void set_log_stream(std::ostream* stream);

void log_warning(std::string_view message);
void log_info(std::string_view message);

// Number of warnings emitted since the last reset; tests use it to observe
// warning paths without scraping the stream.
std::size_t warning_count();
void reset_warning_count();

}  // namespace gazecomp

#endif  // GAZECOMP_LOG_HPP

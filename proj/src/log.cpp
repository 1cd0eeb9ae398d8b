#include "gazecomp/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace gazecomp {

namespace {

std::mutex log_mutex;
std::ostream* log_stream = &std::cerr;
std::atomic<std::size_t> warnings{0};

void emit(std::string_view prefix, std::string_view message) {
  std::lock_guard<std::mutex> lock(log_mutex);
  if (log_stream != nullptr) {
    *log_stream << prefix << message << '\n';
  }
}

}  // namespace

void set_log_stream(std::ostream* stream) {
  std::lock_guard<std::mutex> lock(log_mutex);
  log_stream = stream;
}

void log_warning(std::string_view message) {
  ++warnings;
  emit("warning: ", message);
}

void log_info(std::string_view message) { emit("", message); }

std::size_t warning_count() { return warnings.load(); }

void reset_warning_count() { warnings = 0; }

}  // namespace gazecomp

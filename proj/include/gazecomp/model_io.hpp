#ifndef GAZECOMP_MODEL_IO_HPP
#define GAZECOMP_MODEL_IO_HPP

// Model files: a versioned little-endian binary holding the config, the
// vocabularies and every named parameter block, plus a text manifest at
// `<path>.manifest`.
//
//   magic "GZCMODEL" | u32 version
//   str config (key = value lines)
//   u64 n, n x str    vocabulary tokens (index order)
//   u64 n, n x str    ccg labels
//   u64 n, n x { str name | u64 rows | u64 cols | rows*cols f64, row-major }
//
// str is u64 length + bytes.

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>

#include "gazecomp/model.hpp"

namespace gazecomp {

inline constexpr std::uint32_t kModelFormatVersion = 1;

void write_model(std::ostream& out, const Model& model);
Model read_model(std::istream& in, const std::string& source = "<stream>");

std::string model_manifest(const Model& model);

/// Writes the binary and `<path>.manifest`.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace gazecomp

#endif  // GAZECOMP_MODEL_IO_HPP

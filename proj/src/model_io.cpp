#include "gazecomp/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gazecomp/error.hpp"

namespace gazecomp {

namespace {

constexpr char kMagic[8] = {'G', 'Z', 'C', 'M', 'O', 'D', 'E', 'L'};

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 4);
}

void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated file");
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t count(std::uint64_t limit, const char* what) {
    const auto n = u64();
    if (n > limit) fail(std::string("implausible ") + what + " count");
    return n;
  }
  std::string string() {
    const auto n = count(1ULL << 30, "string length");
    std::string s(n, '\0');
    if (n > 0) bytes(s.data(), n);
    return s;
  }
  [[noreturn]] void fail(const std::string& what) const { throw DataError(source_ + ": " + what); }

 private:
  std::istream& in_;
  std::string source_;
};

}  // namespace

void write_model(std::ostream& out, const Model& model) {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kModelFormatVersion);
  put_string(out, to_key_values(model.config()));
  const auto& tokens = model.vocab().tokens();
  put_u64(out, tokens.size());
  for (const auto& t : tokens) put_string(out, t);
  put_u64(out, model.ccg_labels().size());
  for (const auto& l : model.ccg_labels()) put_string(out, l);
  put_u64(out, model.parameters().size());
  for (const auto& p : model.parameters()) {
    put_string(out, p.name);
    put_u64(out, static_cast<std::uint64_t>(p.value.rows()));
    put_u64(out, static_cast<std::uint64_t>(p.value.cols()));
    const double* data = p.value.data();
    for (ad::Index i = 0; i < p.value.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(data[i]));
  }
}

Model read_model(std::istream& in, const std::string& source) {
  Reader r(in, source);
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) r.fail("not a model file");
  if (const auto version = r.u32(); version != kModelFormatVersion) {
    r.fail("unsupported model format version " + std::to_string(version));
  }
  std::istringstream config_text(r.string());
  const ArchitectureConfig config = architecture_from_key_values(parse_key_values(config_text, source));

  std::vector<std::string> tokens(r.count(1ULL << 28, "vocabulary"));
  for (auto& t : tokens) t = r.string();
  std::vector<std::string> ccg(r.count(1ULL << 24, "label"));
  for (auto& l : ccg) l = r.string();

  Model model(config, Vocabulary(std::move(tokens)), std::move(ccg));
  const auto n = r.count(1ULL << 20, "parameter");
  if (n != model.parameters().size()) {
    r.fail("file has " + std::to_string(n) + " parameters, config implies " +
           std::to_string(model.parameters().size()));
  }
  for (std::uint64_t k = 0; k < n; ++k) {
    const std::string name = r.string();
    auto* p = model.parameters().find(name);
    if (p == nullptr) r.fail("unexpected parameter " + name);
    const auto rows = r.u64();
    const auto cols = r.u64();
    if (rows != static_cast<std::uint64_t>(p->value.rows()) || cols != static_cast<std::uint64_t>(p->value.cols())) {
      r.fail("shape mismatch for " + name);
    }
    double* data = p->value.data();
    for (ad::Index i = 0; i < p->value.size(); ++i) data[i] = std::bit_cast<double>(r.u64());
    p->zero_grad();
  }
  return model;
}

std::string model_manifest(const Model& model) {
  std::ostringstream os;
  os << "format_version = " << kModelFormatVersion << '\n';
  os << to_key_values(model.config());
  os << "vocab_size = " << model.vocab().size() << '\n';
  os << "vocab_fingerprint = " << std::hex << model.vocab().fingerprint() << std::dec << '\n';
  os << "ccg_labels = " << model.ccg_labels().size() << '\n';
  for (const auto& t : model.tasks()) {
    os << "task " << t.name << " attach_layer=" << t.attach_layer << " labels=" << t.labels.size() << '\n';
  }
  os << "parameters = " << model.parameters().size() << " (" << model.parameters().coefficient_count()
     << " values)\n";
  for (const auto& p : model.parameters()) {
    os << "  " << p.name << ' ' << p.value.rows() << 'x' << p.value.cols() << '\n';
  }
  return os.str();
}

void save_model(const Model& model, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_model(out, model);
    if (!out) throw DataError("write failed: " + path.string());
  }
  std::ofstream manifest(path.string() + ".manifest", std::ios::binary);
  if (!manifest) throw DataError("cannot write manifest for " + path.string());
  manifest << model_manifest(model);
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_model(in, path.string());
}

}  // namespace gazecomp

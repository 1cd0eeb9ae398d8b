#include "gazecomp/gaze.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "gazecomp/error.hpp"
#include "gazecomp/log.hpp"

namespace gazecomp {

std::string_view measure_name(GazeMeasure measure) {
  return measure == GazeMeasure::first_pass ? "first_pass" : "regression";
}

GazeMeasure parse_measure(std::string_view name) {
  if (name == "first_pass" || name == "fp") return GazeMeasure::first_pass;
  if (name == "regression" || name == "regr") return GazeMeasure::regression;
  throw ConfigError("unknown gaze measure: " + std::string(name));
}

namespace {

void check_order(std::span<const FixationEvent> events) {
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].order <= events[i - 1].order) {
      throw DataError("fixations not sorted by order at event " + std::to_string(i) + " (reader " +
                      events[i].reader_id + ", sentence " + events[i].sentence_id + ")");
    }
  }
}

struct Split {
  WordDurations first_pass;
  WordDurations regression;
};

// A word's first pass is the run of consecutive fixations that starts with its
// first fixation; every later fixation on it is regression time.
Split split_durations(std::span<const FixationEvent> events) {
  check_order(events);
  Split out;
  std::optional<std::size_t> open_run;
  for (const auto& e : events) {
    const std::size_t w = e.word_index;
    if (!out.first_pass.contains(w)) {
      out.first_pass[w] = e.duration_ms;
      out.regression[w] = 0;
      open_run = w;
    } else if (open_run == w) {
      out.first_pass[w] += e.duration_ms;
    } else {
      out.regression[w] += e.duration_ms;
      open_run.reset();
    }
  }
  return out;
}

std::uint64_t parse_uint(std::string_view field, const std::string& where, const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DataError(where + ": invalid " + what + " `" + std::string(field) + "`");
  }
  return v;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

WordDurations compute_first_pass(std::span<const FixationEvent> events) {
  return split_durations(events).first_pass;
}

WordDurations compute_regression(std::span<const FixationEvent> events) {
  return split_durations(events).regression;
}

ReaderStats reader_stats(std::string reader_id, GazeMeasure measure, std::span<const std::uint64_t> values) {
  ReaderStats s;
  s.reader_id = std::move(reader_id);
  s.measure = measure;
  double total = 0.0;
  for (auto v : values) {
    if (v == 0) continue;
    total += static_cast<double>(v);
    ++s.count_nonzero;
  }
  if (s.count_nonzero == 0) {
    throw DataError("reader " + s.reader_id + " has no non-zero " + std::string(measure_name(measure)) + " values");
  }
  s.mean = total / static_cast<double>(s.count_nonzero);
  double sq = 0.0;
  for (auto v : values) {
    if (v == 0) continue;
    const double d = static_cast<double>(v) - s.mean;
    sq += d * d;
  }
  s.sd = std::sqrt(sq / static_cast<double>(s.count_nonzero));
  if (s.sd == 0.0) {
    log_warning("reader " + s.reader_id + ": " + std::string(measure_name(measure)) +
                " has zero variance; non-zero values map to bin 3");
  }
  return s;
}

int discretize_measure(double value, const ReaderStats& stats) {
  if (value < 0.0 || std::isnan(value)) throw DataError("discretize_measure: negative measure");
  if (stats.sd < 0.0) throw DataError("discretize_measure: negative SD");
  if (value == 0.0) return 0;
  if (stats.sd == 0.0) return 3;
  const double mu = stats.mean;
  const double sd = stats.sd;
  if (value < mu - sd) return 1;
  if (value < mu - 0.5 * sd) return 2;
  if (value < mu + 0.5 * sd) return 3;
  if (value <= mu + sd) return 4;
  return 5;
}

std::vector<FixationEvent> parse_fixations(std::istream& in, const std::string& source) {
  std::vector<FixationEvent> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = strip_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = source + ":" + std::to_string(line_no);
    auto fields = split_tabs(line);
    if (fields.size() != 4 || fields[0].empty() || fields[1].empty()) {
      throw DataError(where + ": expected reader_id<TAB>sentence_id<TAB>word_index<TAB>duration_ms");
    }
    FixationEvent e;
    e.reader_id = fields[0];
    e.sentence_id = fields[1];
    e.word_index = parse_uint(fields[2], where, "word index");
    const auto duration = parse_uint(fields[3], where, "duration");
    if (duration == 0 || duration > UINT32_MAX) throw DataError(where + ": duration must be a positive integer");
    e.duration_ms = static_cast<std::uint32_t>(duration);
    e.order = line_no;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<FixationEvent> parse_fixation_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_fixations(in, path.string());
}

std::vector<GazeSentence> parse_gaze_sentences(std::istream& in, const std::string& source) {
  std::vector<GazeSentence> out;
  std::set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = strip_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    GazeSentence s;
    if (tab != std::string_view::npos) {
      s.id = line.substr(0, tab);
      s.tokens = split_tokens(line.substr(tab + 1));
    }
    const std::string where = source + ":" + std::to_string(line_no);
    if (s.id.empty() || s.tokens.empty()) throw DataError(where + ": expected sentence_id<TAB>tokens");
    if (!seen.insert(s.id).second) throw DataError(where + ": duplicate sentence id " + s.id);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<GazeSentence> parse_gaze_sentence_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_gaze_sentences(in, path.string());
}

std::vector<WordGaze> compute_word_gaze(std::span<const FixationEvent> events, std::span<const GazeSentence> sentences) {
  std::unordered_map<std::string, std::size_t> sentence_index;
  for (std::size_t i = 0; i < sentences.size(); ++i) sentence_index.emplace(sentences[i].id, i);

  // reader -> sentence -> events, preserving stream order.
  std::vector<std::string> readers;
  std::map<std::string, std::map<std::size_t, std::vector<FixationEvent>>> streams;
  for (const auto& e : events) {
    auto it = sentence_index.find(e.sentence_id);
    if (it == sentence_index.end()) throw DataError("fixation on unknown sentence " + e.sentence_id);
    if (e.word_index >= sentences[it->second].tokens.size()) {
      throw DataError("fixation on word " + std::to_string(e.word_index) + " beyond sentence " + e.sentence_id +
                      " (" + std::to_string(sentences[it->second].tokens.size()) + " tokens)");
    }
    if (!streams.contains(e.reader_id)) readers.push_back(e.reader_id);
    streams[e.reader_id][it->second].push_back(e);
  }

  std::vector<WordGaze> out;
  for (const auto& reader : readers) {
    const auto& by_sentence = streams[reader];
    const std::size_t begin = out.size();
    for (std::size_t si = 0; si < sentences.size(); ++si) {
      Split split;
      if (auto it = by_sentence.find(si); it != by_sentence.end()) split = split_durations(it->second);
      for (std::size_t w = 0; w < sentences[si].tokens.size(); ++w) {
        WordGaze g;
        g.reader_id = reader;
        g.sentence_id = sentences[si].id;
        g.word_index = w;
        if (auto f = split.first_pass.find(w); f != split.first_pass.end()) g.first_pass_ms = f->second;
        if (auto r = split.regression.find(w); r != split.regression.end()) g.regression_ms = r->second;
        out.push_back(std::move(g));
      }
    }

    for (GazeMeasure measure : {GazeMeasure::first_pass, GazeMeasure::regression}) {
      auto value_of = [measure](const WordGaze& g) {
        return measure == GazeMeasure::first_pass ? g.first_pass_ms : g.regression_ms;
      };
      std::vector<std::uint64_t> values;
      for (std::size_t i = begin; i < out.size(); ++i) values.push_back(value_of(out[i]));
      const bool any = std::any_of(values.begin(), values.end(), [](auto v) { return v != 0; });
      if (!any) continue;  // every bin stays 0
      const ReaderStats stats = reader_stats(reader, measure, values);
      for (std::size_t i = begin; i < out.size(); ++i) {
        const int bin = discretize_measure(static_cast<double>(value_of(out[i])), stats);
        (measure == GazeMeasure::first_pass ? out[i].fp_bin : out[i].regr_bin) = bin;
      }
    }
  }
  return out;
}

std::vector<ConllSentence> gaze_label_sentences(std::span<const GazeSentence> sentences,
                                                std::span<const WordGaze> gaze, const std::string& reader_id,
                                                GazeMeasure measure) {
  std::map<std::pair<std::string, std::size_t>, int> bins;
  for (const auto& g : gaze) {
    if (g.reader_id != reader_id) continue;
    bins[{g.sentence_id, g.word_index}] = measure == GazeMeasure::first_pass ? g.fp_bin : g.regr_bin;
  }
  std::vector<ConllSentence> out;
  std::ostringstream missing;
  std::size_t missing_count = 0;
  for (const auto& s : sentences) {
    ConllSentence cs;
    cs.tokens = s.tokens;
    for (std::size_t w = 0; w < s.tokens.size(); ++w) {
      auto it = bins.find({s.id, w});
      if (it == bins.end()) {
        if (missing_count++ < 20) missing << ' ' << s.id << ':' << w;
        cs.labels.emplace_back("0");
      } else {
        cs.labels.push_back(std::to_string(it->second));
      }
    }
    out.push_back(std::move(cs));
  }
  if (missing_count > 0) {
    throw DataError("reader " + reader_id + ": missing gaze for " + std::to_string(missing_count) +
                    " word(s):" + missing.str() + (missing_count > 20 ? " ..." : ""));
  }
  return out;
}

std::vector<std::filesystem::path> export_gaze_corpus(std::span<const GazeSentence> sentences,
                                                      std::span<const WordGaze> gaze,
                                                      const std::filesystem::path& out_dir) {
  std::vector<std::string> readers;
  std::set<std::string> seen;
  for (const auto& g : gaze) {
    if (seen.insert(g.reader_id).second) readers.push_back(g.reader_id);
  }
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& reader : readers) {
    for (GazeMeasure measure : {GazeMeasure::first_pass, GazeMeasure::regression}) {
      auto labeled = gaze_label_sentences(sentences, gaze, reader, measure);
      auto path = out_dir / (reader + "." + std::string(measure_name(measure)) + ".conll");
      write_conll_file(path, labeled);
      written.push_back(std::move(path));
    }
  }
  return written;
}

}  // namespace gazecomp

#include "gazecomp/selftest/oracles.hpp"

#include <set>

#include "gazecomp/error.hpp"

namespace gazecomp::selftest {

GazeOracle brute_force_gaze(std::span<const FixationEvent> events) {
  GazeOracle out;
  std::set<std::size_t> words;
  for (const auto& e : events) words.insert(e.word_index);
  for (std::size_t w : words) {
    std::size_t first = 0;
    while (events[first].word_index != w) ++first;
    std::uint64_t fp = 0;
    for (std::size_t j = first; j < events.size() && events[j].word_index == w; ++j) fp += events[j].duration_ms;
    std::uint64_t total = 0;
    for (const auto& e : events) {
      if (e.word_index == w) total += e.duration_ms;
    }
    out.first_pass[w] = fp;
    out.total[w] = total;
    out.regression[w] = total - fp;
  }
  return out;
}

int bin_oracle(double value, double mean, double sd) {
  if (value == 0.0) return 0;
  if (sd == 0.0) return 3;
  const double lower_outer = mean - sd;
  const double lower_inner = mean - sd / 2.0;
  const double upper_inner = mean + sd / 2.0;
  const double upper_outer = mean + sd;
  return 1 + (value >= lower_outer) + (value >= lower_inner) + (value >= upper_inner) + (value > upper_outer);
}

namespace {

bool is_subsequence(const std::vector<std::string>& needle, std::span<const std::string> hay) {
  std::size_t k = 0;
  for (const auto& h : hay) {
    if (k < needle.size() && needle[k] == h) ++k;
  }
  return k == needle.size();
}

}  // namespace

std::size_t brute_force_lcs_length(std::span<const std::string> source, std::span<const std::string> target) {
  const std::size_t n = source.size();
  if (n > 20) throw ConfigError("brute_force_lcs_length: source too long");
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::string> picked;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) picked.push_back(source[i]);
    }
    if (picked.size() > best && is_subsequence(picked, target)) best = picked.size();
  }
  return best;
}

std::vector<std::size_t> brute_force_leftmost_embedding(std::span<const std::string> source,
                                                        std::span<const std::string> target) {
  const std::size_t n = source.size();
  if (n > 20) throw ConfigError("brute_force_leftmost_embedding: source too long");
  std::vector<std::size_t> best;
  bool found = false;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) positions.push_back(i);
    }
    if (positions.size() != target.size()) continue;
    bool match = true;
    for (std::size_t k = 0; k < positions.size() && match; ++k) match = source[positions[k]] == target[k];
    if (match && (!found || positions < best)) {
      best = positions;
      found = true;
    }
  }
  return best;
}

ConfusionCounts brute_force_confusion(std::span<const std::vector<std::string>> gold,
                                      std::span<const std::vector<std::string>> pred, const std::string& positive) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t t = 0; t < gold[i].size(); ++t) {
      const int key = (gold[i][t] == positive ? 2 : 0) + (pred[i][t] == positive ? 1 : 0);
      switch (key) {
        case 3: ++c.tp; break;
        case 1: ++c.fp; break;
        case 2: ++c.fn; break;
        default: ++c.tn; break;
      }
    }
  }
  return c;
}

double f1_from_counts(const ConfusionCounts& c) {
  const double p = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double r = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

}  // namespace gazecomp::selftest

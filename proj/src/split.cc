#include "preftransfer/split.h"

#include <algorithm>
#include <stdexcept>

#include "preftransfer/random.h"

namespace preftransfer {

const char* split_mode_name(SplitMode mode) {
  return mode == SplitMode::kWithIntersection ? "with_intersection" : "no_intersection";
}

SplitMode parse_split_mode(const std::string& text) {
  if (text == "intersect" || text == "with_intersection") return SplitMode::kWithIntersection;
  if (text == "disjoint" || text == "no_intersection") return SplitMode::kNoIntersection;
  throw std::invalid_argument("unknown split mode '" + text + "'");
}

std::vector<std::size_t> ServiceSplit::source_items() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < in_source.size(); ++i) {
    if (in_source[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> ServiceSplit::target_items() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < in_target.size(); ++i) {
    if (in_target[i]) out.push_back(i);
  }
  return out;
}

std::size_t ServiceSplit::shared_count() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < in_source.size(); ++i) count += in_source[i] && in_target[i];
  return count;
}

ServiceSplit make_split(std::size_t catalog_size, SplitMode mode, std::uint64_t seed) {
  if (catalog_size < 2) throw std::invalid_argument("a split needs at least two items");
  ServiceSplit split{mode, seed, seed, {}, {}};
  for (;; ++split.seed) {
    Rng rng(split.seed);
    split.in_source.assign(catalog_size, 0);
    split.in_target.assign(catalog_size, 0);
    if (mode == SplitMode::kWithIntersection) {
      for (auto& s : split.in_source) s = uniform01(rng) < 0.5;
      for (auto& t : split.in_target) t = uniform01(rng) < 0.5;
    } else {
      for (std::size_t i = 0; i < catalog_size; ++i) {
        const bool source = uniform01(rng) < 0.5;
        split.in_source[i] = source;
        split.in_target[i] = !source;
      }
    }
    const bool any_source = std::find(split.in_source.begin(), split.in_source.end(), 1) !=
                            split.in_source.end();
    const bool any_target = std::find(split.in_target.begin(), split.in_target.end(), 1) !=
                            split.in_target.end();
    if (any_source && any_target) return split;
  }
}

}  // namespace preftransfer

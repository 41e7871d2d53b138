#ifndef PREFTRANSFER_SPLIT_H_
#define PREFTRANSFER_SPLIT_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace preftransfer {

enum class SplitMode { kWithIntersection, kNoIntersection };

const char* split_mode_name(SplitMode mode);
/// Accepts "intersect"/"with_intersection" and "disjoint"/"no_intersection".
SplitMode parse_split_mode(const std::string& text);

/// Which catalog items each of the two services offers.
struct ServiceSplit {
  SplitMode mode;
  std::uint64_t requested_seed;
  std::uint64_t seed;  // seed actually used, after resampling empty splits
  std::vector<char> in_source;
  std::vector<char> in_target;

  std::vector<std::size_t> source_items() const;
  std::vector<std::size_t> target_items() const;
  std::size_t shared_count() const;
  int resamples() const { return static_cast<int>(seed - requested_seed); }
};

/// With intersection every item joins each service independently with
/// probability 1/2; without it every item joins exactly one of the two.
/// A draw that leaves a service empty is redrawn with seed + 1.
ServiceSplit make_split(std::size_t catalog_size, SplitMode mode, std::uint64_t seed);

}  // namespace preftransfer

#endif  // PREFTRANSFER_SPLIT_H_

#ifndef PREFTRANSFER_DATASET_H_
#define PREFTRANSFER_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "preftransfer/core.h"

namespace preftransfer {

struct Interaction {
  std::string user;
  std::size_t item;  // row of Dataset::features
  Label label;
};

/// A catalog with item features plus labeled user interactions.
struct Dataset {
  std::string name;
  std::vector<std::string> item_ids;
  std::vector<std::string> item_names;
  Eigen::MatrixXd features;  // items x d_raw
  std::vector<Interaction> interactions;
  std::string checksum;            // FNV-1a 64 of the raw input files, hex
  std::vector<std::string> notes;  // skipped rows, warnings

  std::size_t item_count() const { return item_ids.size(); }
  Eigen::Index feature_dim() const { return features.cols(); }
  /// User ids in order of first appearance.
  std::vector<std::string> users() const;
  /// Interactions grouped by user, keyed by user id.
  std::unordered_map<std::string, std::vector<Interaction>> by_user() const;
  void validate() const;
};

/// FNV-1a 64-bit, continued from `state`.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a_file(const std::filesystem::path& path,
                         std::uint64_t state = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

/// Canonical dataset file: one CSV with header
///   kind,user_id,item_id,label,name,f0,...,f{d-1}
/// `item` rows carry name and features; `pref` rows carry user, item and label.
void write_canonical(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_canonical(const std::filesystem::path& path);

}  // namespace preftransfer

#endif  // PREFTRANSFER_DATASET_H_

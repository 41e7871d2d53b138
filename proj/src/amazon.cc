#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "preftransfer/loaders.h"
#include "preftransfer/text.h"

namespace preftransfer {

namespace {

struct Review {
  std::string user, item, text;
  double rating;
};

std::optional<std::string> string_field(const nlohmann::json& j, const char* a, const char* b) {
  for (const char* key : {a, b}) {
    auto it = j.find(key);
    if (it != j.end() && it->is_string()) return it->get<std::string>();
  }
  return std::nullopt;
}

std::optional<Review> parse_review(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (!j.is_object()) return std::nullopt;
  auto user = string_field(j, "reviewerID", "reviewer");
  auto item = string_field(j, "asin", "item");
  std::optional<double> rating;
  for (const char* key : {"overall", "rating"}) {
    auto it = j.find(key);
    if (it == j.end()) continue;
    if (it->is_number()) rating = it->get<double>();
    if (it->is_string()) rating = try_parse_double(it->get_ref<const std::string&>());
    break;
  }
  if (!user || !item || !rating) return std::nullopt;
  return Review{std::move(*user), std::move(*item),
                string_field(j, "reviewText", "text").value_or(""), *rating};
}

std::filesystem::path resolve_review_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_directory(path)) {
    if (!std::filesystem::exists(path)) {
      throw std::runtime_error(fmt::format("missing file {}", path.string()));
    }
    return path;
  }
  std::vector<std::filesystem::path> found;
  for (const auto& entry : std::filesystem::directory_iterator(path)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".json" || ext == ".jsonl")) found.push_back(entry.path());
  }
  if (found.size() != 1) {
    throw std::runtime_error(fmt::format("expected one review file in {}, found {}",
                                         path.string(), found.size()));
  }
  return found.front();
}

// Visits every well-formed review; returns the number of malformed lines.
template <typename Visit>
std::size_t for_each_review(const std::filesystem::path& file, Visit visit) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", file.string()));
  std::size_t bad = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (auto review = parse_review(line)) {
      visit(*review);
    } else {
      ++bad;
    }
  }
  return bad;
}

}  // namespace

Dataset load_amazon(const std::filesystem::path& path, const AmazonOptions& options) {
  const std::filesystem::path file = resolve_review_file(path);
  Dataset ds;
  ds.name = "amazon";
  ds.checksum = hex64(fnv1a_file(file));

  // First pass: token frequencies and review counts per item.
  std::unordered_map<std::string, std::size_t> token_counts;
  std::map<std::string, std::size_t> item_reviews;
  const std::size_t bad = for_each_review(file, [&](const Review& r) {
    for (std::string& token : tokenize(r.text)) ++token_counts[std::move(token)];
    ++item_reviews[r.item];
  });
  if (item_reviews.empty()) throw std::runtime_error("review file holds no readable reviews");

  std::vector<std::pair<std::string, std::size_t>> ranked(token_counts.begin(),
                                                          token_counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > options.vocabulary) ranked.resize(options.vocabulary);
  std::unordered_map<std::string, Eigen::Index> column;
  for (std::size_t c = 0; c < ranked.size(); ++c) {
    column.emplace(ranked[c].first, static_cast<Eigen::Index>(c));
  }
  if (column.empty()) throw std::runtime_error("review texts hold no tokens");

  std::vector<std::string> catalog;
  for (const auto& entry : item_reviews) catalog.push_back(entry.first);
  std::stable_sort(catalog.begin(), catalog.end(), [&](const std::string& a, const std::string& b) {
    return item_reviews.at(a) > item_reviews.at(b);
  });
  if (catalog.size() > options.max_items) catalog.resize(options.max_items);
  std::sort(catalog.begin(), catalog.end());
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < catalog.size(); ++i) index.emplace(catalog[i], i);

  // Second pass: summed bag-of-words per item and first label per (user, item).
  ds.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(catalog.size()),
                                      static_cast<Eigen::Index>(column.size()));
  std::unordered_set<std::string> seen_pairs;
  std::size_t duplicates = 0;
  for_each_review(file, [&](const Review& r) {
    auto it = index.find(r.item);
    if (it == index.end()) return;
    const auto row = static_cast<Eigen::Index>(it->second);
    for (const std::string& token : tokenize(r.text)) {
      auto col = column.find(token);
      if (col != column.end()) ds.features(row, col->second) += 1.0;
    }
    if (!seen_pairs.insert(r.user + '\x1f' + r.item).second) {
      ++duplicates;
      return;
    }
    ds.interactions.push_back(
        {r.user, it->second, r.rating >= kThumbsUpRating ? Label::kUp : Label::kDown});
  });

  ds.item_ids = catalog;
  ds.item_names = catalog;
  ds.notes.push_back(fmt::format("vocabulary {} terms, catalog {} most-reviewed items",
                                 column.size(), catalog.size()));
  if (duplicates > 0) {
    ds.notes.push_back(fmt::format("kept the first of {} repeated user-item reviews", duplicates));
  }
  if (bad > 0) ds.notes.push_back(fmt::format("skipped {} malformed review lines", bad));
  ds.validate();
  return ds;
}

}  // namespace preftransfer

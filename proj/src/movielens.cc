#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include <fmt/format.h>

#include "preftransfer/loaders.h"
#include "preftransfer/text.h"

namespace preftransfer {

namespace {

constexpr int kItemFields = 5 + kGenreCount;
constexpr const char* kReferenceUser = "308";

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("missing file {}", path.string()));
  return in;
}

std::optional<int> release_year(std::string_view date) {
  date = trim(date);
  if (date.size() < 4) return std::nullopt;
  auto year = try_parse_int(date.substr(date.size() - 4));
  if (!year || *year < 1000 || *year > 9999) return std::nullopt;
  return static_cast<int>(*year);
}

}  // namespace

int movielens_year_bin(std::string_view release_date, int latest_year) {
  const auto year = release_year(release_date);
  if (!year) return kYearBins;
  const int first = latest_year - (kYearBins - 1);
  return std::clamp(*year - first, 0, kYearBins - 1);
}

Dataset load_movielens(const std::filesystem::path& dir, const MovieLensOptions& options) {
  const auto item_path = dir / "u.item";
  const auto rating_path = dir / "u.data";
  std::ifstream items_in = open_or_throw(item_path);
  std::ifstream ratings_in = open_or_throw(rating_path);

  Dataset ds;
  ds.name = "movielens";
  ds.checksum = hex64(fnv1a_file(item_path, fnv1a_file(rating_path)));

  struct RawItem {
    std::string id, title, date;
    std::array<double, kGenreCount> genres;
  };
  std::vector<RawItem> raw;
  std::size_t bad_items = 0;
  std::string line;
  while (std::getline(items_in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split(trim(line), '|');
    if (f.size() != kItemFields || !try_parse_int(f[0])) {
      ++bad_items;
      continue;
    }
    RawItem item{std::string(trim(f[0])), to_utf8(f[1]), f[2], {}};
    bool ok = true;
    for (int g = 0; g < kGenreCount; ++g) {
      const auto flag = try_parse_int(f[5 + g]);
      if (!flag || (*flag != 0 && *flag != 1)) ok = false;
      item.genres[g] = ok ? static_cast<double>(*flag) : 0.0;
    }
    if (!ok) {
      ++bad_items;
      continue;
    }
    raw.push_back(std::move(item));
  }
  if (raw.empty()) throw std::runtime_error("u.item holds no readable items");

  int latest = std::numeric_limits<int>::min();
  for (const RawItem& item : raw) {
    if (auto y = release_year(item.date)) latest = std::max(latest, *y);
  }
  if (latest == std::numeric_limits<int>::min()) latest = kYearBins - 1;

  std::unordered_map<std::string, std::size_t> index;
  ds.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(raw.size()), kMovieLensFeatureDim);
  std::size_t unknown_years = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!index.emplace(raw[i].id, i).second) {
      throw std::runtime_error(fmt::format("u.item lists item {} twice", raw[i].id));
    }
    const auto row = static_cast<Eigen::Index>(i);
    for (int g = 0; g < kGenreCount; ++g) ds.features(row, g) = raw[i].genres[g];
    const int bin = movielens_year_bin(raw[i].date, latest);
    unknown_years += bin == kYearBins;
    ds.features(row, kGenreCount + bin) = 1.0;
    ds.item_ids.push_back(raw[i].id);
    ds.item_names.push_back(raw[i].title);
  }

  std::size_t bad_ratings = 0;
  while (std::getline(ratings_in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split(trim(line), '\t');
    if (f.size() != 4) {
      ++bad_ratings;
      continue;
    }
    const auto user = try_parse_int(f[0]);
    const auto rating = try_parse_int(f[2]);
    const auto item = index.find(std::string(trim(f[1])));
    if (!user || *user < 1 || !rating || *rating < 1 || *rating > 5 || item == index.end() ||
        !try_parse_int(f[3])) {
      ++bad_ratings;
      continue;
    }
    ds.interactions.push_back({std::to_string(*user - 1), item->second,
                               *rating >= kThumbsUpRating ? Label::kUp : Label::kDown});
  }

  ds.notes.push_back(fmt::format("year bins anchored at {}: [{}..{}] one-hot, older merged", latest,
                                 latest - kYearBins + 1, latest));
  if (unknown_years > 0) ds.notes.push_back(fmt::format("{} items with unknown year", unknown_years));
  if (bad_items > 0) ds.notes.push_back(fmt::format("skipped {} malformed item rows", bad_items));
  if (bad_ratings > 0) {
    ds.notes.push_back(fmt::format("skipped {} malformed rating rows", bad_ratings));
  }

  if (options.check_reference_user) {
    int up = 0, down = 0;
    for (const Interaction& it : ds.interactions) {
      if (it.user != kReferenceUser) continue;
      (it.label == Label::kUp ? up : down) += 1;
    }
    if (up != 10 || down != 10) {
      throw std::runtime_error(fmt::format(
          "reference user {} has {} thumbs-up and {} thumbs-down, expected 10 and 10",
          kReferenceUser, up, down));
    }
  }
  ds.validate();
  return ds;
}

}  // namespace preftransfer

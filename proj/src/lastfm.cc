#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "preftransfer/loaders.h"
#include "preftransfer/random.h"
#include "preftransfer/text.h"

namespace preftransfer {

namespace {

// Reads a tab-separated file with a header row; rows with too few numeric
// fields are counted and skipped.
std::vector<std::vector<std::int64_t>> read_numeric_tsv(const std::filesystem::path& path,
                                                        std::size_t fields,
                                                        std::size_t& skipped) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("missing file {}", path.string()));
  std::vector<std::vector<std::int64_t>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split(trim(line), '\t');
    std::vector<std::int64_t> row;
    for (std::size_t c = 0; c < fields && c < f.size(); ++c) {
      if (auto v = try_parse_int(f[c])) row.push_back(*v);
    }
    if (row.size() != fields) {
      ++skipped;
      continue;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Dataset load_lastfm(const std::filesystem::path& dir, const LastfmOptions& options) {
  const auto listen_path = dir / "user_artists.dat";
  const auto tag_path = dir / "user_taggedartists.dat";
  const auto artist_path = dir / "artists.dat";

  std::size_t skipped = 0;
  const auto listens = read_numeric_tsv(listen_path, 3, skipped);
  const auto tags = read_numeric_tsv(tag_path, 3, skipped);

  Dataset ds;
  ds.name = "lastfm";
  ds.checksum = hex64(fnv1a_file(tag_path, fnv1a_file(listen_path)));

  // Catalog: tagged artists, the most-listened first (ties by id).
  std::map<std::int64_t, std::size_t> listeners;
  std::map<std::int64_t, std::map<std::int64_t, double>> tag_counts;
  for (const auto& row : tags) tag_counts[row[1]][row[2]] += 1.0;
  for (const auto& row : listens) {
    if (row[2] > 0) ++listeners[row[1]];
  }
  std::vector<std::int64_t> catalog;
  for (const auto& entry : tag_counts) {
    catalog.push_back(entry.first);
    listeners.try_emplace(entry.first, 0);
  }
  std::stable_sort(catalog.begin(), catalog.end(), [&](std::int64_t a, std::int64_t b) {
    return listeners.at(a) > listeners.at(b);
  });
  if (catalog.size() > options.max_items) catalog.resize(options.max_items);
  std::sort(catalog.begin(), catalog.end());
  if (catalog.empty()) throw std::runtime_error("Last.fm data holds no tagged artists");

  // Feature columns: the most-used tags within the catalog (ties by id).
  std::map<std::int64_t, double> tag_use;
  for (std::int64_t artist : catalog) {
    for (const auto& [tag, count] : tag_counts[artist]) tag_use[tag] += count;
  }
  std::vector<std::pair<std::int64_t, double>> ranked(tag_use.begin(), tag_use.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > options.max_tags) ranked.resize(options.max_tags);
  std::unordered_map<std::int64_t, Eigen::Index> column;
  for (std::size_t c = 0; c < ranked.size(); ++c) {
    column.emplace(ranked[c].first, static_cast<Eigen::Index>(c));
  }

  std::unordered_map<std::int64_t, std::string> names;
  if (std::ifstream in(artist_path, std::ios::binary); in) {
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const std::vector<std::string> f = split(line, '\t');
      if (f.size() >= 2) {
        if (auto id = try_parse_int(f[0])) names[*id] = to_utf8(trim(f[1]));
      }
    }
  }

  std::unordered_map<std::int64_t, std::size_t> index;
  ds.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(catalog.size()),
                                      static_cast<Eigen::Index>(ranked.size()));
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const std::int64_t artist = catalog[i];
    index.emplace(artist, i);
    ds.item_ids.push_back(std::to_string(artist));
    auto name = names.find(artist);
    ds.item_names.push_back(name == names.end() ? ds.item_ids.back() : name->second);
    for (const auto& [tag, count] : tag_counts[artist]) {
      auto col = column.find(tag);
      if (col != column.end()) ds.features(static_cast<Eigen::Index>(i), col->second) = count;
    }
  }

  // Users in ascending id order so the negative-sampling streams are stable.
  std::map<std::int64_t, std::vector<std::size_t>> positives;
  std::map<std::int64_t, std::unordered_set<std::size_t>> listened;
  for (const auto& row : listens) {
    if (row[2] <= 0) continue;
    auto it = index.find(row[1]);
    if (it == index.end()) continue;
    if (listened[row[0]].insert(it->second).second) positives[row[0]].push_back(it->second);
  }
  std::size_t short_users = 0;
  for (const auto& [user, pos] : positives) {
    const std::string uid = std::to_string(user);
    for (std::size_t item : pos) ds.interactions.push_back({uid, item, Label::kUp});
    const auto& heard = listened[user];
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      if (!heard.count(i)) pool.push_back(i);
    }
    Rng rng(mix_seed(options.seed, static_cast<std::uint64_t>(user)));
    const std::size_t want = std::min(pos.size(), pool.size());
    short_users += want < pos.size();
    for (std::size_t pick : sample_without_replacement(rng, pool.size(), want)) {
      ds.interactions.push_back({uid, pool[pick], Label::kDown});
    }
  }

  ds.notes.push_back(fmt::format("catalog: {} most-listened tagged artists, {} tag columns",
                                 catalog.size(), ranked.size()));
  ds.notes.push_back(fmt::format("negatives sampled with seed {}", options.seed));
  if (short_users > 0) {
    ds.notes.push_back(fmt::format("{} users had fewer unlistened artists than positives",
                                   short_users));
  }
  if (skipped > 0) ds.notes.push_back(fmt::format("skipped {} malformed rows", skipped));
  ds.validate();
  return ds;
}

}  // namespace preftransfer

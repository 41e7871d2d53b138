#ifndef PREFTRANSFER_LOADERS_H_
#define PREFTRANSFER_LOADERS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "preftransfer/dataset.h"

namespace preftransfer {

inline constexpr int kGenreCount = 19;
inline constexpr int kYearBins = 70;  // plus one bin for an unknown year
inline constexpr int kMovieLensFeatureDim = kGenreCount + kYearBins + 1;
inline constexpr double kThumbsUpRating = 4.0;

struct MovieLensOptions {
  // The reference user "308" must hold exactly 10 thumbs-up and 10 thumbs-down.
  bool check_reference_user = true;
};

/// Reads u.data and u.item. Users are renumbered from zero (raw id - 1).
/// Features: 19 genre flags, then one-hot release-year bins anchored at the
/// latest year (older years share the first bin), then an unknown-year bin.
Dataset load_movielens(const std::filesystem::path& dir, const MovieLensOptions& options = {});
/// Year bin in [0, kYearBins] for a release date "dd-Mon-yyyy"; kYearBins if unparseable.
int movielens_year_bin(std::string_view release_date, int latest_year);

struct LastfmOptions {
  std::uint64_t seed = 0;
  std::size_t max_tags = 2000;   // most-used tags kept as feature columns
  std::size_t max_items = 3000;  // most-listened tagged artists kept in the catalog
};

/// HetRec Last.fm: user_artists.dat and user_taggedartists.dat (artists.dat
/// optional, for names). Listened artists are thumbs-up; each user gets the
/// same number of seeded random unlistened catalog artists as thumbs-down.
/// Raw features are per-artist tag counts.
Dataset load_lastfm(const std::filesystem::path& dir, const LastfmOptions& options = {});

struct AmazonOptions {
  std::size_t vocabulary = 5000;
  std::size_t max_items = 3000;  // most-reviewed items kept in the catalog
};

/// Line-delimited JSON reviews with reviewerID/asin/overall/reviewText (or
/// reviewer/item/rating/text). `path` is the file or a directory holding one
/// *.json file. Raw features are bag-of-words counts summed over an item's reviews.
Dataset load_amazon(const std::filesystem::path& path, const AmazonOptions& options = {});

/// Lowercased ASCII alphanumeric runs; every other byte separates tokens.
std::vector<std::string> tokenize(std::string_view text);
/// The `size` most frequent tokens, ties broken lexicographically.
std::vector<std::string> build_vocabulary(const std::vector<std::string>& documents,
                                          std::size_t size);

/// Replaces the raw features by a `dim`-component standardized PCA projection.
void reduce_features(Dataset& dataset, Eigen::Index dim);

/// Returns `text` unchanged when it is valid UTF-8, else decodes it as Latin-1.
std::string to_utf8(std::string_view text);

}  // namespace preftransfer

#endif  // PREFTRANSFER_LOADERS_H_

#ifndef PREFTRANSFER_EXPERIMENTS_H_
#define PREFTRANSFER_EXPERIMENTS_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "preftransfer/core.h"
#include "preftransfer/dataset.h"
#include "preftransfer/loaders.h"
#include "preftransfer/split.h"

namespace preftransfer {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kKernelConvention = "k(x,y) = exp(-|x-y|^2 / (2 sigma^2)), B = 1";

struct ExperimentOptions {
  std::string dataset = "movielens";  // movielens, lastfm, amazon, or a canonical .csv path
  std::filesystem::path data_dir = "data";
  std::filesystem::path out_dir = "out";
  RunConfig run;
  bool k_given = false;         // run.k was set explicitly rather than defaulted
  std::optional<double> sigma;  // unset: 1 for MovieLens, 10 otherwise
  SplitMode split = SplitMode::kWithIntersection;
  bool split_given = false;  // table runs both modes unless a split was chosen
  std::vector<int> k_list{1, 2, 4, 8, 16, 32, 64, 128};
  std::vector<std::string> users;  // empty: the command's default users
  int min_up = 2;                  // table filter on D_u within the source service
  int min_down = 2;
  int downstream_seeds = 10;
  double l2 = 1e-2;  // downstream logistic regression penalty
  Eigen::Index pca_dim = 50;
  LastfmOptions lastfm;
  AmazonOptions amazon;

  double effective_sigma() const;
  int k_or(int fallback) const { return k_given ? run.k : fallback; }
};

/// Applies one key=value setting (keys match the long CLI flags without "--").
void apply_option(ExperimentOptions& options, const std::string& key, const std::string& value);
/// Reads a flat key=value file; '#' starts a comment.
void load_config_file(ExperimentOptions& options, const std::filesystem::path& path);
std::vector<int> parse_int_list(const std::string& text);

/// Loads a dataset by name from `data_dir` (ml-100k/, hetrec2011-lastfm-2k/,
/// amazon/); Last.fm and Amazon features are reduced by PCA.
Dataset load_dataset(const ExperimentOptions& options);

/// Everything shared by the users of one dataset split: the candidate pool
/// over the target service and, for MMD, its Gram matrix.
class SplitContext {
 public:
  SplitContext(const Dataset& dataset, SplitMode mode, std::uint64_t seed, double label_scale,
               std::optional<double> sigma);

  const Dataset& dataset() const { return dataset_; }
  const ServiceSplit& split() const { return split_; }
  const CandidatePool& pool() const { return pool_; }
  /// Catalog row of the item behind pool item j.
  std::size_t catalog_item(std::size_t pool_item) const { return target_items_[pool_item]; }
  /// Pool item index of a catalog row, or -1 when the target service lacks it.
  std::ptrdiff_t pool_item(std::size_t catalog_item) const { return pool_index_[catalog_item]; }
  std::shared_ptr<const Eigen::MatrixXd> gram() const { return gram_; }
  double label_scale() const { return label_scale_; }

  /// The user's preferences restricted to the source service, in input order.
  std::vector<Interaction> source_interactions(const std::vector<Interaction>& user) const;
  PreferenceSet source_set(const std::vector<Interaction>& source) const;

 private:
  const Dataset& dataset_;
  ServiceSplit split_;
  std::vector<std::size_t> target_items_;
  std::vector<std::ptrdiff_t> pool_index_;
  CandidatePool pool_;
  std::shared_ptr<const Eigen::MatrixXd> gram_;
  double label_scale_;
};

/// Seed of the per-user streams derived from the run seed.
std::uint64_t user_seed(std::uint64_t seed, const std::string& user);

/// Manifest of one artifact. `config_hash` is the FNV-1a of the manifest
/// without that field, so equal settings give equal hashes.
nlohmann::json make_manifest(const std::string& command, const ExperimentOptions& options,
                             const std::vector<const Dataset*>& datasets,
                             const std::vector<const ServiceSplit*>& splits);
std::string config_hash(const nlohmann::json& manifest);
void write_manifest(const nlohmann::json& manifest, const std::filesystem::path& artifact);

// ---- convergence ----------------------------------------------------------

struct ConvergencePoint {
  std::string user;
  int k;
  double continuous;        // sqrt of the best Frank-Wolfe objective
  double continuous_lower;  // sqrt of the duality-gap certificate
  double pretender;         // best-of-R rounded selection
  double gap() const { return pretender - continuous; }
};

struct ConvergenceResult {
  std::vector<ConvergencePoint> points;
  std::filesystem::path csv;
  std::filesystem::path svg;
  std::string hash;
};

/// Default users: "308" and "21".
ConvergenceResult cmd_convergence(const ExperimentOptions& options, const Dataset& dataset);

// ---- table ----------------------------------------------------------------

struct TableUserRow {
  std::string user;
  std::size_t source_count;
  double continuous;
  double pretender;
  double greedy;
  double random;
};

struct MethodSummary {
  std::string method;
  double mean;
  double stddev;  // sample standard deviation
};

struct TableBlock {
  std::string dataset;
  SplitMode mode;
  std::uint64_t split_seed;
  std::vector<TableUserRow> rows;
  std::vector<MethodSummary> summary;  // continuous, pretender, greedy, random
  // Users whose continuous value exceeded one of their selections' distances.
  std::vector<std::string> bound_violations;
  const MethodSummary& method(const std::string& name) const;
};

struct TableResult {
  std::vector<TableBlock> blocks;
  std::filesystem::path csv;
  std::filesystem::path summary_csv;
  std::string hash;
};

/// One block per split mode in `modes`, K = options.run.k, over every user with
/// at least min_up / min_down source-side thumbs-up / thumbs-down.
TableResult cmd_table(const ExperimentOptions& options, const Dataset& dataset,
                      const std::vector<SplitMode>& modes);

// ---- case study -----------------------------------------------------------

struct CaseEntry {
  std::size_t catalog_item;
  std::string title;
  Label label;
  bool exact_copy;  // selected and in the user's source list with the same label
};

struct CaseStudy {
  std::string user;
  std::vector<CaseEntry> source;    // D_u restricted to the source service
  std::vector<CaseEntry> selected;  // exactly K entries
  std::vector<std::size_t> shared;  // source items the target service also offers
  std::string report;
  std::filesystem::path path;
};

/// Default user "308".
CaseStudy cmd_case_study(const ExperimentOptions& options, const Dataset& dataset);

// ---- downstream -----------------------------------------------------------

struct LogisticModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
};
/// L2-penalized logistic regression (bias unpenalized) by Newton's method.
LogisticModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double l2);
double mean_log_loss(const LogisticModel& model, const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& y);

struct DownstreamRow {
  std::string user;
  std::uint64_t seed;
  std::string method;  // source, pretender, greedy, random
  bool single_class;
  double source_loss;  // NaN when single_class
};

struct DownstreamResult {
  std::vector<DownstreamRow> rows;
  std::filesystem::path csv;
  std::string hash;
  /// Mean source loss of a method for one user over the trained seeds.
  double mean_loss(const std::string& user, const std::string& method) const;
};

/// Default users "308" and "21"; seeds seed .. seed + downstream_seeds - 1.
DownstreamResult cmd_downstream(const ExperimentOptions& options, const Dataset& dataset);

// ---- theory checks --------------------------------------------------------

struct CheckLine {
  std::string name;
  double value;
  double bound;
  bool pass;
};

struct TheoryReport {
  std::vector<CheckLine> lines;
  std::filesystem::path path;
  bool all_pass() const;
};

TheoryReport cmd_theory_checks(const ExperimentOptions& options);

// ---- plotting -------------------------------------------------------------

struct PlotSeries {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};
/// A bare SVG line chart; x is drawn on a log2 axis when `log2_x`.
std::string render_svg(const std::string& title, const std::vector<PlotSeries>& series,
                       bool log2_x);

}  // namespace preftransfer

#endif  // PREFTRANSFER_EXPERIMENTS_H_

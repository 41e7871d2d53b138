#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "preftransfer/baselines.h"
#include "preftransfer/experiments.h"
#include "preftransfer/kernels.h"
#include "preftransfer/pipeline.h"
#include "preftransfer/random.h"
#include "preftransfer/text.h"

namespace preftransfer {

namespace {

constexpr int kCaseStudyK = 20;
constexpr int kDownstreamK = 20;
// Absolute slack when comparing the relaxed value with selection distances;
// both are square roots of sums of kernel values.
constexpr double kBoundSlack = 1e-12;

const std::vector<std::string> kReferenceUsers{"308", "21"};

/// One user's source set on one split, with the metric's matrices and objective.
class UserProblem {
 public:
  UserProblem(const SplitContext& ctx, const std::vector<Interaction>& source, Metric metric,
              double sigma)
      : ctx_(ctx), prefs_(ctx.source_set(source)), metric_(metric) {
    if (metric == Metric::kMmd) {
      mats_.emplace(build_matrices(ctx.gram(), ctx.pool().embeddings(), prefs_.embeddings(),
                                   KernelSpec{sigma, 1.0}));
      objective_ = std::make_unique<MmdObjective>(*mats_);
    } else {
      costs_.emplace(ctx.pool(), prefs_);
      objective_ = std::make_unique<W1Objective>(*costs_, ctx.pool().embeddings(),
                                                 prefs_.embeddings());
    }
  }
  UserProblem(const UserProblem&) = delete;
  UserProblem& operator=(const UserProblem&) = delete;

  const PreferenceSet& prefs() const { return prefs_; }
  const SelectionObjective& objective() const { return *objective_; }

  TransferResult transfer(const RunConfig& run) const {
    if (metric_ == Metric::kMmd) return transfer_mmd(*mats_, run);
    return transfer_w1(*costs_, ctx_.pool().embeddings(), prefs_.embeddings(), run);
  }
  double distance(const Selection& selection) const {
    return objective_->distance(selection.indices());
  }

 private:
  const SplitContext& ctx_;
  PreferenceSet prefs_;
  Metric metric_;
  std::optional<KernelMatrices> mats_;
  std::optional<CostMatrix> costs_;
  std::unique_ptr<SelectionObjective> objective_;
};

std::optional<double> kernel_sigma(const ExperimentOptions& options) {
  if (options.run.metric == Metric::kMmd) return options.effective_sigma();
  return std::nullopt;
}

const std::vector<Interaction>& user_interactions(
    const std::unordered_map<std::string, std::vector<Interaction>>& by_user,
    const std::string& user) {
  auto it = by_user.find(user);
  if (it == by_user.end()) throw std::invalid_argument("unknown user '" + user + "'");
  return it->second;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  return out;
}

std::string row(std::initializer_list<std::string> fields) {
  std::string out;
  for (const std::string& f : fields) {
    if (!out.empty()) out += ',';
    out += csv_field(f);
  }
  return out + '\n';
}

std::string num(double v) { return format_double(v); }

MethodSummary summarize(const std::string& method, const std::vector<double>& values) {
  if (values.empty()) return {method, std::nan(""), std::nan("")};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  return {method, mean, sd};
}

std::string dataset_tag(const Dataset& ds) { return ds.name.empty() ? "dataset" : ds.name; }

}  // namespace

// ---- convergence ----------------------------------------------------------

ConvergenceResult cmd_convergence(const ExperimentOptions& options, const Dataset& dataset) {
  const std::vector<std::string> users = options.users.empty() ? kReferenceUsers : options.users;
  const SplitContext ctx(dataset, options.split, options.run.seed, options.run.label_scale,
                         kernel_sigma(options));
  const auto by_user = dataset.by_user();
  const nlohmann::json manifest = make_manifest("convergence", options, {&dataset}, {&ctx.split()});

  ConvergenceResult result;
  result.hash = manifest["config_hash"];
  const std::string stem =
      fmt::format("convergence_{}_{}", dataset_tag(dataset), split_mode_name(options.split));
  result.csv = options.out_dir / (stem + ".csv");
  result.svg = options.out_dir / (stem + ".svg");

  std::ofstream csv = open_output(result.csv);
  csv << "dataset,split,split_seed,user,n_source,K,L,R,metric,continuous,"
         "continuous_certified_lower,pretender,gap,seed,config_hash\n";
  std::vector<PlotSeries> series;
  const std::vector<std::string> palette{"#d62728", "#1f77b4", "#ff9896", "#aec7e8"};
  for (std::size_t u = 0; u < users.size(); ++u) {
    const std::string& user = users[u];
    const auto source = ctx.source_interactions(user_interactions(by_user, user));
    if (source.empty()) {
      throw std::invalid_argument("user '" + user + "' has no preferences on the source service");
    }
    const UserProblem problem(ctx, source, options.run.metric, options.effective_sigma());
    PlotSeries cont{fmt::format("user {} continuous", user), palette[(2 * u) % 4], {}, {}};
    PlotSeries pret{fmt::format("user {} pretender", user), palette[(2 * u + 1) % 4], {}, {}};
    for (int k : options.k_list) {
      RunConfig run = options.run;
      run.k = k;
      run.seed = user_seed(options.run.seed, user);
      const TransferResult tr = problem.transfer(run);
      const ConvergencePoint p{user, k, tr.continuous_value, tr.continuous_lower_bound,
                               tr.outcome.distance};
      result.points.push_back(p);
      cont.x.push_back(k);
      cont.y.push_back(p.continuous);
      pret.x.push_back(k);
      pret.y.push_back(p.pretender);
      csv << row({dataset_tag(dataset), split_mode_name(options.split),
                  std::to_string(ctx.split().seed), user, std::to_string(source.size()),
                  std::to_string(k), std::to_string(run.fw_iterations),
                  std::to_string(run.rounding_repeats), metric_name(run.metric), num(p.continuous),
                  num(p.continuous_lower), num(p.pretender), num(p.gap()),
                  std::to_string(run.seed), result.hash});
    }
    series.push_back(std::move(cont));
    series.push_back(std::move(pret));
  }
  std::ofstream svg = open_output(result.svg);
  svg << render_svg(fmt::format("{} distance vs K ({})", metric_name(options.run.metric),
                                dataset_tag(dataset)),
                    series, true);
  write_manifest(manifest, result.csv);
  return result;
}

// ---- table ----------------------------------------------------------------

TableResult cmd_table(const ExperimentOptions& options, const Dataset& dataset,
                      const std::vector<SplitMode>& modes) {
  const auto by_user = dataset.by_user();
  const std::vector<std::string> users = options.users.empty() ? dataset.users() : options.users;
  const int k = options.run.k;

  std::vector<std::unique_ptr<SplitContext>> contexts;
  std::vector<const ServiceSplit*> splits;
  for (SplitMode mode : modes) {
    contexts.push_back(std::make_unique<SplitContext>(dataset, mode, options.run.seed,
                                                      options.run.label_scale,
                                                      kernel_sigma(options)));
    splits.push_back(&contexts.back()->split());
  }
  const nlohmann::json manifest = make_manifest("table", options, {&dataset}, splits);
  TableResult result;
  result.hash = manifest["config_hash"];
  result.csv = options.out_dir / fmt::format("table_{}.csv", dataset_tag(dataset));
  result.summary_csv = options.out_dir / fmt::format("table_{}_summary.csv", dataset_tag(dataset));

  std::ofstream csv = open_output(result.csv);
  csv << "dataset,split,split_seed,user,n_source,K,continuous,pretender,greedy,random,"
         "bound_holds,seed,config_hash\n";
  for (const auto& ctx : contexts) {
    TableBlock block{dataset_tag(dataset), ctx->split().mode, ctx->split().seed, {}, {}, {}};
    for (const std::string& user : users) {
      const auto source = ctx->source_interactions(user_interactions(by_user, user));
      const auto up = std::count_if(source.begin(), source.end(),
                                    [](const Interaction& i) { return i.label == Label::kUp; });
      const auto down = static_cast<std::ptrdiff_t>(source.size()) - up;
      if (up < options.min_up || down < options.min_down) continue;
      if (static_cast<std::size_t>(k) > ctx->pool().size()) {
        throw std::invalid_argument(fmt::format("K={} exceeds the {} target candidates", k,
                                                ctx->pool().size()));
      }
      const UserProblem problem(*ctx, source, options.run.metric, options.effective_sigma());
      RunConfig run = options.run;
      run.seed = user_seed(options.run.seed, user);
      const TransferResult tr = problem.transfer(run);
      const Selection greedy = greedy_nearest(ctx->pool(), problem.prefs(), k,
                                              run.exclusive_labels);
      const Selection random = random_select(ctx->pool(), k, mix_seed(run.seed, 1),
                                             run.exclusive_labels);
      const TableUserRow r{user, source.size(), tr.continuous_value, tr.outcome.distance,
                           problem.distance(greedy), problem.distance(random)};
      const bool holds = r.continuous <= std::min({r.pretender, r.greedy, r.random}) + kBoundSlack;
      if (!holds) block.bound_violations.push_back(user);
      block.rows.push_back(r);
      csv << row({block.dataset, split_mode_name(block.mode), std::to_string(block.split_seed),
                  user, std::to_string(source.size()), std::to_string(k), num(r.continuous),
                  num(r.pretender), num(r.greedy), num(r.random), holds ? "1" : "0",
                  std::to_string(run.seed), result.hash});
    }
    std::vector<double> cont, pret, greedy, random;
    for (const TableUserRow& r : block.rows) {
      cont.push_back(r.continuous);
      pret.push_back(r.pretender);
      greedy.push_back(r.greedy);
      random.push_back(r.random);
    }
    block.summary = {summarize("continuous", cont), summarize("pretender", pret),
                     summarize("greedy", greedy), summarize("random", random)};
    result.blocks.push_back(std::move(block));
  }

  std::ofstream summary = open_output(result.summary_csv);
  summary << "dataset,split,split_seed,method,users,mean,std,K,seed,config_hash\n";
  for (const TableBlock& b : result.blocks) {
    for (const MethodSummary& s : b.summary) {
      summary << row({b.dataset, split_mode_name(b.mode), std::to_string(b.split_seed), s.method,
                      std::to_string(b.rows.size()), num(s.mean), num(s.stddev),
                      std::to_string(k), std::to_string(options.run.seed), result.hash});
    }
  }
  write_manifest(manifest, result.csv);
  write_manifest(manifest, result.summary_csv);
  return result;
}

// ---- case study -----------------------------------------------------------

CaseStudy cmd_case_study(const ExperimentOptions& base, const Dataset& dataset) {
  ExperimentOptions options = base;
  options.run.k = base.k_or(kCaseStudyK);
  CaseStudy study;
  study.user = options.users.empty() ? "308" : options.users.front();
  const SplitContext ctx(dataset, options.split, options.run.seed, options.run.label_scale,
                         kernel_sigma(options));
  const auto by_user = dataset.by_user();
  const auto source = ctx.source_interactions(user_interactions(by_user, study.user));
  if (source.empty()) {
    throw std::invalid_argument("user '" + study.user + "' has no preferences on the source service");
  }
  const UserProblem problem(ctx, source, options.run.metric, options.effective_sigma());
  RunConfig run = options.run;
  run.seed = user_seed(options.run.seed, study.user);
  const TransferResult tr = problem.transfer(run);

  for (const Interaction& it : source) {
    if (ctx.pool_item(it.item) >= 0) study.shared.push_back(it.item);
  }
  for (std::size_t c : tr.outcome.selection.indices()) {
    const std::size_t item = ctx.catalog_item(CandidatePool::item_index(c));
    const Label label = CandidatePool::label_of(c);
    const bool copy = std::any_of(source.begin(), source.end(), [&](const Interaction& it) {
      return it.item == item && it.label == label;
    });
    study.selected.push_back({item, dataset.item_names[item], label, copy});
  }
  for (const Interaction& it : source) {
    const bool copy = std::any_of(study.selected.begin(), study.selected.end(),
                                  [&](const CaseEntry& e) { return e.exact_copy && e.catalog_item == it.item; });
    study.source.push_back({it.item, dataset.item_names[it.item], it.label, copy});
  }

  const nlohmann::json manifest = make_manifest("case-study", options, {&dataset}, {&ctx.split()});
  const std::string hash = manifest["config_hash"];
  std::string& r = study.report;
  r += fmt::format("user {}  K={}  metric={}  split={} (seed {})  config {}\n", study.user,
                   run.k, metric_name(run.metric), split_mode_name(ctx.split().mode),
                   ctx.split().seed, hash);
  r += fmt::format("continuous {}  pretender {}\n", num(tr.continuous_value),
                   num(tr.outcome.distance));
  r += fmt::format("source items offered by both services: {}\n", study.shared.size());
  r += "(* = exact copy: same item, same label, in both lists)\n";
  const auto section = [&](const char* heading, const std::vector<CaseEntry>& entries, Label label) {
    const auto count = std::count_if(entries.begin(), entries.end(),
                                     [&](const CaseEntry& e) { return e.label == label; });
    r += fmt::format("\n{} ({})\n", heading, count);
    for (const CaseEntry& e : entries) {
      if (e.label == label) r += fmt::format("  {} {}\n", e.exact_copy ? '*' : ' ', e.title);
    }
  };
  section("source thumbs-up", study.source, Label::kUp);
  section("source thumbs-down", study.source, Label::kDown);
  section("selected thumbs-up", study.selected, Label::kUp);
  section("selected thumbs-down", study.selected, Label::kDown);

  study.path = options.out_dir / fmt::format("case_study_{}_user{}.txt", dataset_tag(dataset),
                                             study.user);
  std::ofstream out = open_output(study.path);
  out << r;
  write_manifest(manifest, study.path);
  return study;
}

// ---- downstream -----------------------------------------------------------

namespace {

double log_loss_term(double z, double y) {
  // log(1 + e^z) - y z, evaluated without overflow.
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
}

double penalized_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                      double b, double l2) {
  const Eigen::VectorXd z = (x * w).array() + b;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) sum += log_loss_term(z[i], y[i]);
  return sum / static_cast<double>(x.rows()) + 0.5 * l2 * w.squaredNorm();
}

}  // namespace

LogisticModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double l2) {
  if (x.rows() != y.size() || x.rows() < 1) throw std::invalid_argument("bad logistic inputs");
  if (!(l2 > 0.0)) throw std::invalid_argument("logistic penalty must be positive");
  const Eigen::Index n = x.rows(), d = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);  // weights then bias
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd w = theta.head(d);
    const double b = theta[d];
    const Eigen::VectorXd z = (x * w).array() + b;
    const Eigen::VectorXd p = (1.0 / (1.0 + (-z.array()).exp())).matrix();
    const Eigen::VectorXd s = (p.array() * (1.0 - p.array())).matrix();
    Eigen::VectorXd grad(d + 1);
    grad.head(d) = inv_n * x.transpose() * (p - y) + l2 * w;
    grad[d] = inv_n * (p - y).sum();
    Eigen::MatrixXd hess(d + 1, d + 1);
    hess.topLeftCorner(d, d) = inv_n * x.transpose() * s.asDiagonal() * x;
    hess.topLeftCorner(d, d).diagonal().array() += l2;
    hess.topRightCorner(d, 1) = inv_n * x.transpose() * s;
    hess.bottomLeftCorner(1, d) = hess.topRightCorner(d, 1).transpose();
    hess(d, d) = inv_n * s.sum() + 1e-12;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    // Backtracking keeps Newton monotone when the curvature is tiny.
    const double f0 = penalized_loss(x, y, w, b, l2);
    double t = 1.0;
    while (t > 1e-8 &&
           penalized_loss(x, y, w - t * step.head(d), b - t * step[d], l2) > f0 - 1e-4 * t * grad.dot(step)) {
      t *= 0.5;
    }
    theta -= t * step;
    if (t * step.norm() < 1e-10) break;
  }
  return {theta.head(d), theta[d]};
}

double mean_log_loss(const LogisticModel& model, const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& y) {
  const Eigen::VectorXd z = (x * model.weights).array() + model.bias;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) sum += log_loss_term(z[i], y[i]);
  return sum / static_cast<double>(z.size());
}

DownstreamResult cmd_downstream(const ExperimentOptions& base, const Dataset& dataset) {
  ExperimentOptions options = base;
  options.run.k = base.k_or(kDownstreamK);
  const std::vector<std::string> users = options.users.empty() ? kReferenceUsers : options.users;
  const SplitContext ctx(dataset, options.split, options.run.seed, options.run.label_scale,
                         kernel_sigma(options));
  const auto by_user = dataset.by_user();
  const nlohmann::json manifest = make_manifest("downstream", options, {&dataset}, {&ctx.split()});
  DownstreamResult result;
  result.hash = manifest["config_hash"];
  result.csv = options.out_dir / fmt::format("downstream_{}_{}.csv", dataset_tag(dataset),
                                             split_mode_name(options.split));
  std::ofstream csv = open_output(result.csv);
  csv << "dataset,split,split_seed,user,K,method,single_class,source_log_loss,seed,config_hash\n";

  for (const std::string& user : users) {
    const auto source = ctx.source_interactions(user_interactions(by_user, user));
    if (source.empty()) {
      throw std::invalid_argument("user '" + user + "' has no preferences on the source service");
    }
    const UserProblem problem(ctx, source, options.run.metric, options.effective_sigma());
    const auto d = dataset.feature_dim();
    Eigen::MatrixXd eval_x(static_cast<Eigen::Index>(source.size()), d);
    Eigen::VectorXd eval_y(static_cast<Eigen::Index>(source.size()));
    for (std::size_t i = 0; i < source.size(); ++i) {
      eval_x.row(static_cast<Eigen::Index>(i)) =
          dataset.features.row(static_cast<Eigen::Index>(source[i].item));
      eval_y[static_cast<Eigen::Index>(i)] = label_value(source[i].label);
    }
    const auto train_on = [&](const std::vector<std::pair<std::size_t, Label>>& picks) {
      Eigen::MatrixXd x(static_cast<Eigen::Index>(picks.size()), d);
      Eigen::VectorXd y(static_cast<Eigen::Index>(picks.size()));
      for (std::size_t i = 0; i < picks.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) =
            dataset.features.row(static_cast<Eigen::Index>(picks[i].first));
        y[static_cast<Eigen::Index>(i)] = label_value(picks[i].second);
      }
      const double positives = y.sum();
      if (positives == 0.0 || positives == static_cast<double>(y.size())) {
        return std::optional<double>();
      }
      return std::optional<double>(mean_log_loss(fit_logistic(x, y, options.l2), eval_x, eval_y));
    };
    const auto picks_of = [&](const Selection& sel) {
      std::vector<std::pair<std::size_t, Label>> out;
      for (std::size_t c : sel.indices()) {
        out.emplace_back(ctx.catalog_item(CandidatePool::item_index(c)), CandidatePool::label_of(c));
      }
      return out;
    };
    std::vector<std::pair<std::size_t, Label>> source_picks;
    for (const Interaction& it : source) source_picks.emplace_back(it.item, it.label);

    for (int s = 0; s < options.downstream_seeds; ++s) {
      const std::uint64_t seed = options.run.seed + static_cast<std::uint64_t>(s);
      RunConfig run = options.run;
      run.seed = user_seed(seed, user);
      const TransferResult tr = problem.transfer(run);
      const Selection greedy = greedy_nearest(ctx.pool(), problem.prefs(), run.k,
                                              run.exclusive_labels);
      const Selection random = random_select(ctx.pool(), run.k, mix_seed(run.seed, 1),
                                             run.exclusive_labels);
      const std::vector<std::pair<std::string, std::vector<std::pair<std::size_t, Label>>>> methods{
          {"source", source_picks},
          {"pretender", picks_of(tr.outcome.selection)},
          {"greedy", picks_of(greedy)},
          {"random", picks_of(random)}};
      for (const auto& [method, picks] : methods) {
        const std::optional<double> loss = train_on(picks);
        result.rows.push_back({user, seed, method, !loss, loss.value_or(std::nan(""))});
        csv << row({dataset_tag(dataset), split_mode_name(options.split),
                    std::to_string(ctx.split().seed), user, std::to_string(run.k), method,
                    loss ? "0" : "1", loss ? num(*loss) : "", std::to_string(seed), result.hash});
      }
    }
  }
  write_manifest(manifest, result.csv);
  return result;
}

}  // namespace preftransfer

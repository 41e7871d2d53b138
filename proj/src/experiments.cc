#include "preftransfer/experiments.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "preftransfer/kernels.h"
#include "preftransfer/random.h"
#include "preftransfer/text.h"

namespace preftransfer {

double ExperimentOptions::effective_sigma() const {
  if (sigma) return *sigma;
  return dataset == "movielens" ? 1.0 : 10.0;
}

namespace {

bool parse_bool(const std::string& text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw std::invalid_argument("not a boolean: '" + text + "'");
}

int parse_positive(const std::string& text, const char* what) {
  const std::int64_t v = parse_int(text);
  if (v < 1 || v > std::numeric_limits<int>::max()) {
    throw std::invalid_argument(fmt::format("{} must be a positive integer, got {}", what, text));
  }
  return static_cast<int>(v);
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const std::string& part : split(text, ',')) {
    if (!trim(part).empty()) out.push_back(parse_positive(std::string(trim(part)), "list entry"));
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

void apply_option(ExperimentOptions& options, const std::string& raw_key,
                  const std::string& raw_value) {
  std::string key(trim(raw_key));
  std::replace(key.begin(), key.end(), '_', '-');
  const std::string value(trim(raw_value));
  if (key == "dataset") {
    options.dataset = value;
  } else if (key == "data-dir") {
    options.data_dir = value;
  } else if (key == "out-dir") {
    options.out_dir = value;
  } else if (key == "metric") {
    options.run.metric = parse_metric(value);
  } else if (key == "K") {
    options.run.k = parse_positive(value, "K");
    options.k_given = true;
  } else if (key == "K-list") {
    options.k_list = parse_int_list(value);
  } else if (key == "L") {
    options.run.fw_iterations = parse_positive(value, "L");
  } else if (key == "R") {
    options.run.rounding_repeats = parse_positive(value, "R");
  } else if (key == "sigma") {
    const double s = parse_double(value);
    if (!(s > 0.0)) throw std::invalid_argument("sigma must be positive");
    options.sigma = s;
  } else if (key == "C") {
    options.run.label_scale = parse_double(value);
  } else if (key == "split") {
    options.split = parse_split_mode(value);
    options.split_given = true;
  } else if (key == "seed") {
    const std::int64_t s = parse_int(value);
    if (s < 0) throw std::invalid_argument("seed must be non-negative");
    options.run.seed = static_cast<std::uint64_t>(s);
  } else if (key == "exclusive-labels") {
    options.run.exclusive_labels = parse_bool(value);
  } else if (key == "users") {
    options.users.clear();
    for (const std::string& u : split(value, ',')) {
      if (!trim(u).empty()) options.users.emplace_back(trim(u));
    }
  } else if (key == "min-up") {
    options.min_up = static_cast<int>(parse_int(value));
  } else if (key == "min-down") {
    options.min_down = static_cast<int>(parse_int(value));
  } else if (key == "downstream-seeds") {
    options.downstream_seeds = parse_positive(value, "downstream-seeds");
  } else if (key == "l2") {
    options.l2 = parse_double(value);
  } else if (key == "pca-dim") {
    options.pca_dim = parse_positive(value, "pca-dim");
  } else if (key == "max-items") {
    options.lastfm.max_items = options.amazon.max_items =
        static_cast<std::size_t>(parse_positive(value, "max-items"));
  } else if (key == "max-tags") {
    options.lastfm.max_tags = static_cast<std::size_t>(parse_positive(value, "max-tags"));
  } else if (key == "vocabulary") {
    options.amazon.vocabulary = static_cast<std::size_t>(parse_positive(value, "vocabulary"));
  } else {
    throw std::invalid_argument("unknown option '" + raw_key + "'");
  }
}

void load_config_file(ExperimentOptions& options, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open config {}", path.string()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(fmt::format("{}:{}: expected key=value", path.string(), line_no));
    }
    apply_option(options, line.substr(0, eq), line.substr(eq + 1));
  }
}

Dataset load_dataset(const ExperimentOptions& options) {
  const std::filesystem::path as_path(options.dataset);
  if (as_path.extension() == ".csv") return read_canonical(as_path);
  Dataset ds;
  if (options.dataset == "movielens") {
    ds = load_movielens(options.data_dir / "ml-100k");
  } else if (options.dataset == "lastfm") {
    LastfmOptions lf = options.lastfm;
    lf.seed = options.run.seed;
    ds = load_lastfm(options.data_dir / "hetrec2011-lastfm-2k", lf);
    reduce_features(ds, options.pca_dim);
  } else if (options.dataset == "amazon") {
    ds = load_amazon(options.data_dir / "amazon", options.amazon);
    reduce_features(ds, options.pca_dim);
  } else {
    throw std::invalid_argument("unknown dataset '" + options.dataset + "'");
  }
  return ds;
}

namespace {

CandidatePool make_pool(const Dataset& ds, const std::vector<std::size_t>& target_items,
                        double label_scale) {
  std::vector<Item> items;
  items.reserve(target_items.size());
  for (std::size_t i : target_items) {
    items.push_back({ds.item_ids[i], ds.features.row(static_cast<Eigen::Index>(i)).transpose()});
  }
  return build_candidate_pool(std::move(items), label_scale);
}

}  // namespace

SplitContext::SplitContext(const Dataset& dataset, SplitMode mode, std::uint64_t seed,
                           double label_scale, std::optional<double> sigma)
    : dataset_(dataset),
      split_(make_split(dataset.item_count(), mode, seed)),
      target_items_(split_.target_items()),
      pool_index_(dataset.item_count(), -1),
      pool_(make_pool(dataset, target_items_, label_scale)),
      label_scale_(label_scale) {
  for (std::size_t j = 0; j < target_items_.size(); ++j) {
    pool_index_[target_items_[j]] = static_cast<std::ptrdiff_t>(j);
  }
  if (sigma) {
    gram_ = std::make_shared<const Eigen::MatrixXd>(
        gram_matrix(pool_.embeddings(), KernelSpec{*sigma, 1.0}));
  }
}

std::vector<Interaction> SplitContext::source_interactions(
    const std::vector<Interaction>& user) const {
  std::vector<Interaction> out;
  for (const Interaction& it : user) {
    if (split_.in_source[it.item]) out.push_back(it);
  }
  return out;
}

PreferenceSet SplitContext::source_set(const std::vector<Interaction>& source) const {
  if (source.empty()) throw std::invalid_argument("user has no preferences on the source service");
  std::vector<LabeledPoint> points;
  points.reserve(source.size());
  for (const Interaction& it : source) {
    points.emplace_back(dataset_.item_ids[it.item],
                        dataset_.features.row(static_cast<Eigen::Index>(it.item)).transpose(),
                        it.label, label_scale_);
  }
  return PreferenceSet(std::move(points));
}

std::uint64_t user_seed(std::uint64_t seed, const std::string& user) {
  return mix_seed(seed, fnv1a(user));
}

nlohmann::json make_manifest(const std::string& command, const ExperimentOptions& options,
                             const std::vector<const Dataset*>& datasets,
                             const std::vector<const ServiceSplit*>& splits) {
  nlohmann::json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["K"] = options.run.k;
  m["K_list"] = options.k_list;
  m["L"] = options.run.fw_iterations;
  m["R"] = options.run.rounding_repeats;
  m["seed"] = options.run.seed;
  m["metric"] = metric_name(options.run.metric);
  m["sigma"] = options.effective_sigma();
  m["C"] = options.run.label_scale;
  m["exclusive_labels"] = options.run.exclusive_labels;
  m["users"] = options.users;
  m["user_filter"] = {{"min_up", options.min_up}, {"min_down", options.min_down}};
  m["downstream"] = {{"seeds", options.downstream_seeds}, {"l2", options.l2}};
  m["kernel"] = kKernelConvention;
  m["continuous_value"] =
      options.run.metric == Metric::kMmd
          ? "sqrt of the best Frank-Wolfe objective (upper estimate of the relaxed optimum)"
          : "exact joint LP value";
  m["greedy_baseline"] = "nearest source point in label-augmented embedding space";
  m["random_baseline"] = "uniform labeled candidates without replacement";
  m["w1_features"] = "standardized features, not rescaled to the unit cube";
  nlohmann::json ds = nlohmann::json::array();
  for (const Dataset* d : datasets) {
    ds.push_back({{"name", d->name},
                  {"checksum", d->checksum},
                  {"items", d->item_count()},
                  {"feature_dim", d->feature_dim()},
                  {"notes", d->notes}});
  }
  m["datasets"] = ds;
  nlohmann::json sp = nlohmann::json::array();
  for (const ServiceSplit* s : splits) {
    sp.push_back({{"mode", split_mode_name(s->mode)},
                  {"requested_seed", s->requested_seed},
                  {"seed", s->seed},
                  {"resamples", s->resamples()}});
  }
  m["splits"] = sp;
  m["config_hash"] = config_hash(m);
  return m;
}

std::string config_hash(const nlohmann::json& manifest) {
  nlohmann::json copy = manifest;
  copy.erase("config_hash");
  return hex64(fnv1a(copy.dump()));
}

void write_manifest(const nlohmann::json& manifest, const std::filesystem::path& artifact) {
  std::filesystem::path path = artifact;
  path += ".manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << manifest.dump(2) << '\n';
}

const MethodSummary& TableBlock::method(const std::string& name) const {
  for (const MethodSummary& s : summary) {
    if (s.method == name) return s;
  }
  throw std::out_of_range("no summary for method " + name);
}

double DownstreamResult::mean_loss(const std::string& user, const std::string& method) const {
  double sum = 0.0;
  int count = 0;
  for (const DownstreamRow& row : rows) {
    if (row.user == user && row.method == method && !row.single_class) {
      sum += row.source_loss;
      ++count;
    }
  }
  return count > 0 ? sum / count : std::nan("");
}

bool TheoryReport::all_pass() const {
  return std::all_of(lines.begin(), lines.end(), [](const CheckLine& l) { return l.pass; });
}

std::string render_svg(const std::string& title, const std::vector<PlotSeries>& series,
                       bool log2_x) {
  constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = 0.0, y_hi = -INFINITY;
  const auto tx = [&](double x) { return log2_x ? std::log2(x) : x; };
  for (const PlotSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_lo = std::min(x_lo, tx(s.x[i]));
      x_hi = std::max(x_hi, tx(s.x[i]));
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
  if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + (tx(x) - x_lo) / (x_hi - x_lo) * plot_w; };
  const auto py = [&](double y) { return kTop + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h; };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" font-size=\"14\">{}</text>\n"
      "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n"
      "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
      kWidth, kHeight, kLeft, title, kLeft, kTop + plot_h, kLeft + plot_w, kTop + plot_h, kLeft,
      kTop, kLeft, kTop + plot_h);
  for (int t = 0; t <= 4; ++t) {
    const double y = y_lo + (y_hi - y_lo) * t / 4.0;
    out += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n",
                       kLeft - 6, py(y) + 4, y);
  }
  if (!series.empty()) {
    for (double x : series.front().x) {
      out += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", px(x),
                         kTop + plot_h + 18, x);
    }
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    std::string points;
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      points += fmt::format("{:.2f},{:.2f} ", px(series[s].x[i]), py(series[s].y[i]));
    }
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
                       series[s].color, points);
    out += fmt::format(
        "<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", kLeft + plot_w + 10,
        kTop + 16 + 18 * static_cast<double>(s), series[s].color, series[s].label);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace preftransfer

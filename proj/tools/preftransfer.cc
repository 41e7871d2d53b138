// Command-line driver for the preference-transfer experiments.
//
//   preftransfer <command> [--flag value ...]
//
// Settings from --config are applied first and flags override them.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "preftransfer/experiments.h"
#include "preftransfer/text.h"

namespace {

using preftransfer::ExperimentOptions;

struct FlagValues {
  std::string config;
  std::vector<std::pair<std::string, std::string*>> storage;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::vector<std::unique_ptr<std::string>> owned;
};

struct FlagSpec {
  const char* key;
  const char* help;
};

const std::vector<FlagSpec> kFlags{
    {"dataset", "movielens, lastfm, amazon, or a canonical .csv"},
    {"data-dir", "directory holding the raw datasets"},
    {"out-dir", "where CSV, text, SVG and manifest files go"},
    {"metric", "mmd or w1"},
    {"K", "number of items to select"},
    {"K-list", "comma-separated K values for convergence"},
    {"L", "Frank-Wolfe iterations"},
    {"R", "rounding repeats"},
    {"sigma", "Gaussian kernel bandwidth"},
    {"C", "label coordinate scale"},
    {"split", "intersect or disjoint"},
    {"seed", "base seed"},
    {"exclusive-labels", "at most one label per item (true/false)"},
    {"users", "comma-separated user ids"},
    {"min-up", "table filter: thumbs-up on the source service"},
    {"min-down", "table filter: thumbs-down on the source service"},
    {"downstream-seeds", "seeds per user in the downstream evaluation"},
    {"l2", "logistic regression penalty"},
    {"pca-dim", "PCA components for Last.fm and Amazon"},
    {"max-items", "catalog cap for Last.fm and Amazon"},
    {"max-tags", "tag cap for Last.fm"},
    {"vocabulary", "vocabulary size for Amazon"},
};

void add_flags(CLI::App& cmd, FlagValues& values) {
  cmd.add_option("--config", values.config, "flat key=value settings file");
  for (const FlagSpec& f : kFlags) {
    values.owned.push_back(std::make_unique<std::string>());
    std::string* slot = values.owned.back().get();
    CLI::Option* opt = cmd.add_option(fmt::format("--{}", f.key), *slot, f.help);
    values.storage.emplace_back(f.key, slot);
    values.options.emplace_back(f.key, opt);
  }
}

ExperimentOptions resolve(const FlagValues& values) {
  ExperimentOptions options;
  if (!values.config.empty()) preftransfer::load_config_file(options, values.config);
  for (std::size_t i = 0; i < values.options.size(); ++i) {
    if (values.options[i].second->count() > 0) {
      preftransfer::apply_option(options, values.storage[i].first, *values.storage[i].second);
    }
  }
  return options;
}

int run_ingest(const ExperimentOptions& options) {
  const preftransfer::Dataset ds = preftransfer::load_dataset(options);
  const std::filesystem::path out = options.out_dir / fmt::format("{}.csv", ds.name);
  std::filesystem::create_directories(options.out_dir);
  preftransfer::write_canonical(ds, out);
  const auto manifest = preftransfer::make_manifest("ingest", options, {&ds}, {});
  preftransfer::write_manifest(manifest, out);
  fmt::print("{}: {} items, {} features, {} preferences, {} users, checksum {}\n", ds.name,
             ds.item_count(), ds.feature_dim(), ds.interactions.size(), ds.users().size(),
             ds.checksum);
  for (const std::string& note : ds.notes) fmt::print("  {}\n", note);
  fmt::print("wrote {}\n", out.string());
  return 0;
}

int run_convergence(const ExperimentOptions& options) {
  const preftransfer::Dataset ds = preftransfer::load_dataset(options);
  const auto result = preftransfer::cmd_convergence(options, ds);
  fmt::print("{:>6} {:>5} {:>12} {:>12} {:>12}\n", "user", "K", "continuous", "pretender", "gap");
  for (const auto& p : result.points) {
    fmt::print("{:>6} {:>5} {:>12.6f} {:>12.6f} {:>12.6f}\n", p.user, p.k, p.continuous,
               p.pretender, p.gap());
  }
  fmt::print("wrote {} and {}\n", result.csv.string(), result.svg.string());
  return 0;
}

int run_table(const ExperimentOptions& base) {
  std::vector<preftransfer::SplitMode> modes{preftransfer::SplitMode::kWithIntersection,
                                             preftransfer::SplitMode::kNoIntersection};
  if (base.split_given) modes = {base.split};
  bool ok = true;
  for (const std::string& name : preftransfer::split(base.dataset, ',')) {
    ExperimentOptions options = base;
    options.dataset = std::string(preftransfer::trim(name));
    const preftransfer::Dataset ds = preftransfer::load_dataset(options);
    const auto result = preftransfer::cmd_table(options, ds, modes);
    for (const auto& block : result.blocks) {
      fmt::print("{} / {} (split seed {}, {} users)\n", block.dataset,
                 preftransfer::split_mode_name(block.mode), block.split_seed, block.rows.size());
      for (const auto& s : block.summary) {
        fmt::print("  {:<11} {:.6f} +- {:.6f}\n", s.method, s.mean, s.stddev);
      }
      if (!block.bound_violations.empty()) {
        ok = false;
        fmt::print("  continuous value above a selection for {} users\n",
                   block.bound_violations.size());
      }
    }
    fmt::print("wrote {}\n", result.csv.string());
  }
  return ok ? 0 : 1;
}

int run_case_study(const ExperimentOptions& options) {
  const preftransfer::Dataset ds = preftransfer::load_dataset(options);
  const auto study = preftransfer::cmd_case_study(options, ds);
  fmt::print("{}", study.report);
  fmt::print("wrote {}\n", study.path.string());
  return 0;
}

int run_theory(const ExperimentOptions& options) {
  const auto report = preftransfer::cmd_theory_checks(options);
  for (const auto& line : report.lines) {
    fmt::print("{} {}  value {}  bound {}\n", line.pass ? "PASS" : "FAIL", line.name,
               preftransfer::format_double(line.value), preftransfer::format_double(line.bound));
  }
  fmt::print("wrote {}\n", report.path.string());
  return report.all_pass() ? 0 : 1;
}

int run_downstream(const ExperimentOptions& options) {
  const preftransfer::Dataset ds = preftransfer::load_dataset(options);
  const auto result = preftransfer::cmd_downstream(options, ds);
  std::vector<std::string> users;
  for (const auto& row : result.rows) {
    if (std::find(users.begin(), users.end(), row.user) == users.end()) users.push_back(row.user);
  }
  for (const std::string& user : users) {
    fmt::print("user {}\n", user);
    for (const char* method : {"source", "pretender", "greedy", "random"}) {
      fmt::print("  {:<10} mean source log-loss {:.6f}\n", method, result.mean_loss(user, method));
    }
  }
  fmt::print("wrote {}\n", result.csv.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference transfer between recommender services"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const ExperimentOptions&);
  };
  const std::vector<Command> commands{
      {"ingest", "load a raw dataset and write its canonical CSV", run_ingest},
      {"convergence", "distance vs K for a few users", run_convergence},
      {"table", "mean distances over all users for every method", run_table},
      {"case-study", "titles selected for one user", run_case_study},
      {"theory-check", "Monte-Carlo checks of the rounding guarantees", run_theory},
      {"downstream", "train on selections, evaluate on source preferences", run_downstream},
  };
  std::vector<FlagValues> values(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    subs.push_back(app.add_subcommand(commands[i].name, commands[i].help));
    add_flags(*subs.back(), values[i]);
  }
  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (subs[i]->parsed()) return commands[i].run(resolve(values[i]));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}

#include "preftransfer/dataset.h"

#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

#include "preftransfer/text.h"

namespace preftransfer {

std::vector<std::string> Dataset::users() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const Interaction& it : interactions) {
    if (seen.insert(it.user).second) out.push_back(it.user);
  }
  return out;
}

std::unordered_map<std::string, std::vector<Interaction>> Dataset::by_user() const {
  std::unordered_map<std::string, std::vector<Interaction>> out;
  for (const Interaction& it : interactions) out[it.user].push_back(it);
  return out;
}

void Dataset::validate() const {
  if (item_ids.size() != item_names.size()) {
    throw std::logic_error("dataset item ids and names differ in length");
  }
  if (static_cast<std::size_t>(features.rows()) != item_ids.size()) {
    throw std::logic_error("dataset feature rows do not match the item count");
  }
  if (features.cols() < 1) throw std::logic_error("dataset has no feature columns");
  for (const Interaction& it : interactions) {
    if (it.item >= item_ids.size()) throw std::logic_error("interaction refers to a missing item");
  }
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path, std::uint64_t state) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::string buffer(1 << 16, '\0');
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    state = fnv1a(std::string_view(buffer.data(), static_cast<std::size_t>(in.gcount())), state);
  }
  return state;
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

void write_canonical(const Dataset& dataset, const std::filesystem::path& path) {
  dataset.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << "kind,user_id,item_id,label,name";
  for (Eigen::Index c = 0; c < dataset.features.cols(); ++c) out << ",f" << c;
  out << '\n';
  for (std::size_t i = 0; i < dataset.item_count(); ++i) {
    out << "item,," << csv_field(dataset.item_ids[i]) << ",," << csv_field(dataset.item_names[i]);
    for (Eigen::Index c = 0; c < dataset.features.cols(); ++c) {
      out << ',' << format_double(dataset.features(static_cast<Eigen::Index>(i), c));
    }
    out << '\n';
  }
  for (const Interaction& it : dataset.interactions) {
    out << "pref," << csv_field(it.user) << ',' << csv_field(dataset.item_ids[it.item]) << ','
        << label_value(it.label) << ",\n";
  }
  if (!out) throw std::runtime_error(fmt::format("write failed for {}", path.string()));
}

Dataset read_canonical(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("canonical file is empty");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 6 || header[0] != "kind" || header[1] != "user_id" ||
      header[2] != "item_id" || header[3] != "label" || header[4] != "name") {
    throw std::runtime_error("canonical file has an unexpected header");
  }
  const std::size_t dim = header.size() - 5;

  Dataset ds;
  ds.name = path.stem().string();
  ds.checksum = hex64(fnv1a_file(path));
  std::vector<std::vector<double>> rows;
  std::unordered_map<std::string, std::size_t> index;
  struct PendingPref {
    std::string user, item;
    int label;
  };
  std::vector<PendingPref> prefs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f[0] == "item") {
      if (f.size() != header.size()) {
        throw std::runtime_error(fmt::format("line {}: expected {} fields", line_no, header.size()));
      }
      if (!index.emplace(f[2], ds.item_ids.size()).second) {
        throw std::runtime_error(fmt::format("line {}: duplicate item {}", line_no, f[2]));
      }
      ds.item_ids.push_back(f[2]);
      ds.item_names.push_back(f[4]);
      std::vector<double> row(dim);
      for (std::size_t c = 0; c < dim; ++c) row[c] = parse_double(f[5 + c]);
      rows.push_back(std::move(row));
    } else if (f[0] == "pref") {
      if (f.size() < 4) throw std::runtime_error(fmt::format("line {}: short pref row", line_no));
      prefs.push_back({f[1], f[2], static_cast<int>(parse_int(f[3]))});
    } else {
      throw std::runtime_error(fmt::format("line {}: unknown row kind '{}'", line_no, f[0]));
    }
  }
  ds.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < dim; ++c) {
      ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  for (const PendingPref& p : prefs) {
    auto found = index.find(p.item);
    if (found == index.end()) throw std::runtime_error("pref row refers to unknown item " + p.item);
    ds.interactions.push_back({p.user, found->second, label_from_int(p.label)});
  }
  ds.validate();
  return ds;
}

}  // namespace preftransfer

#include "preftransfer/loaders.h"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include <fmt/format.h>

#include "preftransfer/pca.h"

namespace preftransfer {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string token;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (c < 0x80 && std::isalnum(c)) {
      token += static_cast<char>(std::tolower(c));
    } else if (!token.empty()) {
      out.push_back(std::move(token));
      token.clear();
    }
  }
  if (!token.empty()) out.push_back(std::move(token));
  return out;
}

std::vector<std::string> build_vocabulary(const std::vector<std::string>& documents,
                                          std::size_t size) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const std::string& doc : documents) {
    for (std::string& token : tokenize(doc)) ++counts[std::move(token)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > size) ranked.resize(size);
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (auto& entry : ranked) out.push_back(std::move(entry.first));
  return out;
}

void reduce_features(Dataset& dataset, Eigen::Index dim) {
  const PcaModel model = fit_pca(dataset.features, dim);
  dataset.features = apply_pca(model, dataset.features);
  for (const std::string& warning : model.warnings) dataset.notes.push_back(warning);
  dataset.notes.push_back(fmt::format("PCA to {} standardized components", dim));
}

std::string to_utf8(std::string_view text) {
  bool valid = true;
  for (std::size_t i = 0; i < text.size() && valid;) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    if (c < 0x80) {
      extra = 0;
    } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
      extra = 1;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
    } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
      extra = 3;
    } else {
      valid = false;
      break;
    }
    if (i + extra >= text.size() && extra > 0) {
      valid = false;
      break;
    }
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) valid = false;
    }
    i += extra + 1;
  }
  if (valid) return std::string(text);
  std::string out;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (c < 0x80) {
      out += raw;
    } else {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    }
  }
  return out;
}

}  // namespace preftransfer

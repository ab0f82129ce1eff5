#include "dsgpa/datasets.hpp"

#include <fstream>
#include <istream>
#include <random>
#include <stdexcept>
#include <string_view>

#include <fmt/core.h>

#include "dsgpa/random.hpp"

namespace dsgpa {

Dataset gaussian_blobs(Index samples, Index dim, int classes, double spread, std::uint64_t seed) {
  if (samples <= 0 || dim <= 0 || classes <= 0)
    throw std::invalid_argument("gaussian_blobs needs positive samples, dim and classes");
  SplitMix64 rng(derive_seed(seed, {0x626c6f62ULL}));
  std::uniform_real_distribution<double> center(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, spread);

  Eigen::MatrixXd centers(classes, dim);
  for (int c = 0; c < classes; ++c)
    for (Index d = 0; d < dim; ++d) centers(c, d) = center(rng);

  Dataset out;
  out.features.resize(samples, dim);
  out.labels.resize(static_cast<std::size_t>(samples));
  for (Index s = 0; s < samples; ++s) {
    const int label = static_cast<int>(s % classes);
    out.labels[static_cast<std::size_t>(s)] = label;
    for (Index d = 0; d < dim; ++d) out.features(s, d) = centers(label, d) + noise(rng);
  }
  return out;
}

namespace {

double parse_double(std::string_view field, int lineno) {
  std::string text(field);
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size())
    throw std::invalid_argument(fmt::format("dataset line {}: cannot parse '{}' as a number", lineno, text));
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset read_dataset_csv(std::istream& is, int classes) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  int lineno = 0;
  std::size_t width = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    std::vector<double> fields;
    while (true) {
      auto comma = rest.find(',');
      fields.push_back(parse_double(trim(rest.substr(0, comma)), lineno));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() < 2) throw std::invalid_argument(fmt::format("dataset line {}: need a label and at least one feature", lineno));
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw std::invalid_argument(fmt::format("dataset line {}: expected {} fields, got {}", lineno, width, fields.size()));
    const double label = fields.front();
    if (label != static_cast<double>(static_cast<int>(label)) || label < 0 || label >= classes)
      throw std::invalid_argument(fmt::format("dataset line {}: label {} outside [0, {})", lineno, label, classes));
    labels.push_back(static_cast<int>(label));
    fields.erase(fields.begin());
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw std::invalid_argument("dataset is empty");

  Dataset out;
  out.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(width - 1));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c + 1 < width; ++c) out.features(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  out.labels = std::move(labels);
  return out;
}

Dataset load_dataset_csv(const std::string& path, int classes) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open dataset '{}'", path));
  return read_dataset_csv(in, classes);
}

}  // namespace dsgpa

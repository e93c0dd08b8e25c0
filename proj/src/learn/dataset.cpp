#include "txhist/learn/dataset.hpp"

#include <sstream>

#include "txhist/format.hpp"

namespace txhist::learn {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

void Dataset::validate() const {
  const auto n = static_cast<std::size_t>(features.rows());
  if (labels.size() != n || subjects.size() != n) {
    throw ContractViolation("dataset: row counts differ between features, labels and subjects");
  }
  if (feature_names.size() != static_cast<std::size_t>(features.cols())) {
    throw ContractViolation("dataset: feature name count does not match column count");
  }
  if (weighted() && static_cast<std::size_t>(weights.size()) != n) {
    throw ContractViolation("dataset: weight vector length differs from row count");
  }
  if (!features.allFinite()) throw ContractViolation("dataset: non-finite feature value");
  if (weighted() && !(weights.array() > 0.0).all()) {
    throw ContractViolation("dataset: weights must be positive");
  }
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  if (weighted()) out.weights.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(rows[r]);
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(src);
    if (weighted()) out.weights[static_cast<Eigen::Index>(r)] = weights[src];
    out.labels.push_back(labels[rows[r]]);
    out.subjects.push_back(subjects[rows[r]]);
  }
  out.feature_names = feature_names;
  return out;
}

Dataset Dataset::select_columns(std::span<const int> columns) const {
  Dataset out;
  out.features.resize(features.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out.features.col(static_cast<Eigen::Index>(c)) = features.col(columns[c]);
    out.feature_names.push_back(feature_names.at(static_cast<std::size_t>(columns[c])));
  }
  out.labels = labels;
  out.subjects = subjects;
  out.weights = weights;
  return out;
}

std::vector<int> FeatureMask::columns() const {
  std::vector<int> cols;
  for (int i = 0; i < kNumFeatures; ++i) {
    switch (feature_group(i)) {
      case FeatureGroup::Basic: if (basic) cols.push_back(i); break;
      case FeatureGroup::Extra: if (extra) cols.push_back(i); break;
      case FeatureGroup::Moments: if (moments) cols.push_back(i); break;
    }
  }
  return cols;
}

std::string FeatureMask::to_string() const {
  if (basic && extra && moments) return "all";
  std::string s;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += '+';
    s += name;
  };
  add(basic, "basic");
  add(extra, "extra");
  add(moments, "moments");
  return s.empty() ? "none" : s;
}

FeatureMask FeatureMask::parse(std::string_view text) {
  if (text == "all") return {};
  FeatureMask mask{false, false, false};
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find_first_of(",+", start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view token = text.substr(start, end - start);
    if (token == "basic") mask.basic = true;
    else if (token == "extra") mask.extra = true;
    else if (token == "moments") mask.moments = true;
    else throw InputError("unknown feature group '" + std::string(token) +
                          "' (expected all, basic, extra, moments)");
    start = end + 1;
  }
  return mask;
}

Dataset make_dataset(std::vector<std::string> subjects, std::vector<Category> labels,
                     std::span<const FeatureVector> features) {
  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(features.size()), kNumFeatures);
  for (std::size_t r = 0; r < features.size(); ++r) {
    data.features.row(static_cast<Eigen::Index>(r)) = features[r].transpose();
  }
  data.subjects = std::move(subjects);
  data.labels = std::move(labels);
  data.feature_names.assign(feature_names().begin(), feature_names().end());
  data.validate();
  return data;
}

Dataset read_feature_csv(std::istream& in) {
  std::string line;
  std::size_t line_number = 0;
  bool have_header = false;
  Dataset data;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_csv(line);
    if (!have_header) {
      if (fields.size() < 3 || fields[0] != "subject" || fields[1] != "category") {
        throw InputError("feature CSV: expected header 'subject,category,...'", line_number);
      }
      for (std::size_t i = 2; i < fields.size(); ++i) data.feature_names.emplace_back(fields[i]);
      have_header = true;
      continue;
    }
    if (fields.size() != data.feature_names.size() + 2) {
      throw InputError("feature CSV: wrong field count", line_number);
    }
    data.subjects.emplace_back(fields[0]);
    try {
      data.labels.push_back(parse_category(fields[1]));
      std::vector<double> values;
      values.reserve(fields.size() - 2);
      for (std::size_t i = 2; i < fields.size(); ++i) values.push_back(parse_double(fields[i]));
      rows.push_back(std::move(values));
    } catch (const InputError& e) {
      throw InputError(std::string("feature CSV: ") + e.what(), line_number);
    }
  }
  if (!have_header) throw InputError("feature CSV: missing header");
  data.features.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(data.feature_names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  if (!data.features.allFinite()) throw InputError("feature CSV: non-finite value");
  return data;
}

void write_feature_csv(std::ostream& out, const Dataset& data, const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "subject,category";
  for (const auto& name : data.feature_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    const auto row = static_cast<std::size_t>(r);
    out << data.subjects[row] << ',' << category_name(data.labels[row]);
    for (Eigen::Index c = 0; c < data.cols(); ++c) out << ',' << format_double(data.features(r, c));
    out << '\n';
  }
}

}  // namespace txhist::learn

#include "txhist/learn/serialize.hpp"

#include <json.hpp>

#include "txhist/format.hpp"

namespace txhist::learn {

namespace {

using Json = nlohmann::ordered_json;

// Single list of (section, key, field) triples shared by both directions.
template <typename Config, typename Visitor>
void visit_config(Config& c, Visitor&& v) {
  v("logistic", "learning_rate", c.logistic.learning_rate);
  v("logistic", "max_iterations", c.logistic.max_iterations);
  v("logistic", "tolerance", c.logistic.tolerance);
  v("logistic", "l2", c.logistic.l2);
  v("perceptron", "epochs", c.perceptron.epochs);
  v("perceptron", "learning_rate", c.perceptron.learning_rate);
  v("tree", "max_depth", c.tree.max_depth);
  v("tree", "min_samples_leaf", c.tree.min_samples_leaf);
  v("tree", "min_samples_split", c.tree.min_samples_split);
  v("forest", "trees", c.forest.trees);
  v("forest", "max_depth", c.forest.max_depth);
  v("forest", "max_features", c.forest.max_features);
  v("forest", "min_samples_leaf", c.forest.min_samples_leaf);
  v("forest", "bootstrap", c.forest.bootstrap);
  v("boosting", "rounds", c.boosting.rounds);
  v("boosting", "max_depth", c.boosting.max_depth);
  v("boosting", "learning_rate", c.boosting.learning_rate);
  v("boosting", "lambda", c.boosting.lambda);
  v("boosting", "min_child_hessian", c.boosting.min_child_hessian);
  v("boosting", "min_samples_leaf", c.boosting.min_samples_leaf);
}

Json config_json(const ModelConfig& config) {
  Json j = Json::object();
  visit_config(config, [&](const char* section, const char* key, const auto& field) {
    j[section][key] = field;
  });
  return j;
}

ModelConfig config_from(const Json& j, ModelConfig base) {
  if (!j.is_object()) throw InputError("model config must be a JSON object");
  std::size_t matched = 0;
  std::size_t present = 0;
  for (const auto& [section, body] : j.items()) {
    if (!body.is_object()) throw InputError("model config section '" + section + "' must be an object");
    if (!config_json(base).contains(section)) {
      throw InputError("model config: unknown section '" + section + "'");
    }
    present += body.size();
  }
  visit_config(base, [&](const char* section, const char* key, auto& field) {
    const auto s = j.find(section);
    if (s == j.end()) return;
    const auto v = s->find(key);
    if (v == s->end()) return;
    try {
      field = v->template get<std::remove_reference_t<decltype(field)>>();
    } catch (const nlohmann::json::exception&) {
      throw InputError(std::string("model config: bad value for ") + section + "." + key);
    }
    ++matched;
  });
  if (matched != present) throw InputError("model config contains unknown keys");
  return base;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const Json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.front().size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw InputError("model: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

Json vector_json(const Eigen::RowVectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::RowVectorXd vector_from(const Json& j) {
  Eigen::RowVectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Json tree_json(const Tree& tree) {
  Json nodes = Json::array();
  for (const auto& n : tree.nodes) {
    Json node;
    node["feature"] = n.feature;
    node["threshold"] = n.threshold;
    node["left"] = n.left;
    node["right"] = n.right;
    node["gain"] = n.gain;
    node["weight"] = n.weight;
    node["value"] = n.value;
    nodes.push_back(std::move(node));
  }
  return nodes;
}

Tree tree_from(const Json& j, std::size_t num_features) {
  Tree tree;
  for (const auto& node : j) {
    TreeNode n;
    n.feature = node.at("feature").get<int>();
    n.threshold = node.at("threshold").get<double>();
    n.left = node.at("left").get<int>();
    n.right = node.at("right").get<int>();
    n.gain = node.at("gain").get<double>();
    n.weight = node.at("weight").get<double>();
    n.value = node.at("value").get<std::vector<double>>();
    tree.nodes.push_back(std::move(n));
  }
  const auto count = static_cast<int>(tree.nodes.size());
  if (count == 0) throw InputError("model: empty tree");
  for (const auto& n : tree.nodes) {
    if (n.is_leaf()) continue;
    if (n.feature >= static_cast<int>(num_features) || n.left <= 0 || n.left >= count ||
        n.right <= 0 || n.right >= count) {
      throw InputError("model: corrupt tree node");
    }
  }
  return tree;
}

std::string_view group_name(const std::string& feature) {
  const int index = feature_index(feature);
  if (index < 0) return "other";
  switch (feature_group(index)) {
    case FeatureGroup::Basic: return "basic";
    case FeatureGroup::Extra: return "extra";
    case FeatureGroup::Moments: return "moments";
  }
  return "other";
}

Json importance_json(const std::vector<FeatureImportance>& importance) {
  Json out = Json::array();
  for (std::size_t r = 0; r < importance.size(); ++r) {
    Json e;
    e["rank"] = r + 1;
    e["feature"] = importance[r].name;
    e["group"] = group_name(importance[r].name);
    e["score"] = importance[r].score;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

std::string model_config_to_json(const ModelConfig& config) { return config_json(config).dump(); }

ModelConfig parse_model_config(std::string_view json_text, const ModelConfig& base) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("model config: ") + e.what());
  }
  return config_from(j, base);
}

std::string model_to_json(const Model& model, const std::string& config_hash) {
  Json j;
  j["format_version"] = kModelFormatVersion;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["kind"] = model_kind_name(model.kind);
  j["seed"] = model.seed;
  j["config"] = config_json(model.config);
  j["feature_names"] = model.feature_names;
  Json classes = Json::array();
  for (Category c : model.classes) classes.push_back(category_name(c));
  j["classes"] = classes;
  j["constant"] = model.constant;
  j["scaler"] = model.scaler ? vector_json(model.scaler->scale) : Json(nullptr);
  Json params = Json::object();
  if (!model.constant) {
    switch (model.kind) {
      case ModelKind::LogisticRegression:
      case ModelKind::Perceptron:
        params["coefficients"] = matrix_json(model.coefficients);
        params["intercept"] = vector_json(model.intercept);
        break;
      case ModelKind::GradientBoosting:
        params["base_score"] = vector_json(model.base_score);
        [[fallthrough]];
      case ModelKind::DecisionTree:
      case ModelKind::RandomForest: {
        Json trees = Json::array();
        for (const Tree& t : model.trees) trees.push_back(tree_json(t));
        params["trees"] = std::move(trees);
        break;
      }
    }
  }
  j["params"] = std::move(params);
  return j.dump(1) + "\n";
}

Model model_from_json(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("model: ") + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw InputError("model: unsupported format version");
    }
    Model m;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = config_from(j.at("config"), {});
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& c : j.at("classes")) m.classes.push_back(parse_category(c.get<std::string>()));
    if (m.classes.empty()) throw InputError("model: no classes");
    m.constant = j.at("constant").get<bool>();
    if (!j.at("scaler").is_null()) m.scaler = MaxAbsScaler{vector_from(j.at("scaler"))};
    const Json& params = j.at("params");
    const auto k = static_cast<Eigen::Index>(m.classes.size());
    const auto d = static_cast<Eigen::Index>(m.feature_names.size());
    if (!m.constant) {
      switch (m.kind) {
        case ModelKind::LogisticRegression:
        case ModelKind::Perceptron:
          m.coefficients = matrix_from(params.at("coefficients"));
          m.intercept = vector_from(params.at("intercept"));
          if (!m.scaler || m.scaler->scale.size() != d || m.coefficients.rows() != d ||
              m.coefficients.cols() != k || m.intercept.size() != k) {
            throw InputError("model: linear parameter shapes do not match");
          }
          break;
        case ModelKind::GradientBoosting:
          m.base_score = vector_from(params.at("base_score"));
          if (m.base_score.size() != k) throw InputError("model: base score size mismatch");
          [[fallthrough]];
        case ModelKind::DecisionTree:
        case ModelKind::RandomForest:
          for (const auto& t : params.at("trees")) {
            m.trees.push_back(tree_from(t, static_cast<std::size_t>(d)));
          }
          if (m.trees.empty()) throw InputError("model: no trees");
          break;
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model: ") + e.what());
  }
}

std::string report_to_json(const EvaluationReport& report) {
  Json j;
  j["format_version"] = kReportFormatVersion;
  j["config_hash"] = report.config_hash;
  j["seed"] = report.seed;
  j["config"] = report.config_json.empty() ? Json(nullptr) : Json::parse(report.config_json);
  j["model"] = model_kind_name(report.kind);
  j["features"] = report.mask.to_string();
  j["num_features"] = report.feature_names.size();
  j["k"] = report.k;
  j["weighted"] = report.weighted;
  j["micro_f1_mean"] = report.micro_f1_mean;
  j["macro_f1_mean"] = report.macro_f1_mean;
  Json folds = Json::array();
  for (const auto& f : report.folds) {
    Json e;
    e["fold"] = f.fold;
    e["train_size"] = f.train_size;
    e["test_size"] = f.test_size;
    e["micro_f1"] = f.micro_f1;
    e["macro_f1"] = f.macro_f1;
    e["degenerate"] = f.degenerate;
    folds.push_back(std::move(e));
  }
  j["folds"] = std::move(folds);
  j["degenerate_folds"] = report.degenerate_folds;
  j["pooled"]["micro_f1"] = report.pooled.micro_f1;
  j["pooled"]["macro_f1"] = report.pooled.macro_f1;
  Json per_class = Json::array();
  for (Category c : kAllCategories) {
    const ClassScore& s = report.pooled.per_class[ordinal(c)];
    Json e;
    e["category"] = category_name(c);
    e["precision"] = s.precision;
    e["recall"] = s.recall;
    e["f1"] = s.f1;
    e["support"] = s.support;
    e["predicted"] = s.predicted;
    per_class.push_back(std::move(e));
  }
  j["per_class"] = std::move(per_class);
  Json labels = Json::array();
  for (Category c : kAllCategories) labels.push_back(category_name(c));
  j["confusion"]["labels"] = labels;
  j["confusion"]["raw"] = matrix_json(report.pooled.confusion.cast<double>());
  j["confusion"]["normalized"] = matrix_json(row_normalized(report.pooled.confusion));
  j["importance"] = importance_json(report.importance);
  return j.dump(2) + "\n";
}

void write_confusion_csv(std::ostream& out, const EvaluationReport& report,
                         const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  auto header = [&] {
    out << "true\\predicted";
    for (Category c : kAllCategories) out << ',' << category_name(c);
    out << '\n';
  };
  header();
  for (Category r : kAllCategories) {
    out << category_name(r);
    for (Category c : kAllCategories) out << ',' << report.pooled.confusion(ordinal(r), ordinal(c));
    out << '\n';
  }
  out << '\n';
  const NormalizedConfusion norm = row_normalized(report.pooled.confusion);
  header();
  for (Category r : kAllCategories) {
    out << category_name(r);
    for (Category c : kAllCategories) out << ',' << format_double(norm(ordinal(r), ordinal(c)));
    out << '\n';
  }
}

void write_importance_csv(std::ostream& out, const std::vector<FeatureImportance>& importance,
                          const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "rank,feature,group,score\n";
  for (std::size_t r = 0; r < importance.size(); ++r) {
    out << r + 1 << ',' << importance[r].name << ',' << group_name(importance[r].name) << ','
        << format_double(importance[r].score) << '\n';
  }
}

}  // namespace txhist::learn

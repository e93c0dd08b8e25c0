#ifndef TXHIST_LEARN_SERIALIZE_HPP
#define TXHIST_LEARN_SERIALIZE_HPP

#include <ostream>
#include <string>
#include <string_view>

#include "txhist/learn/cross_validate.hpp"
#include "txhist/learn/models.hpp"

namespace txhist::learn {

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

/// Compact JSON object with every hyperparameter, grouped by model kind.
std::string model_config_to_json(const ModelConfig& config);

/// Applies the keys present in `json_text` on top of `base`; unknown keys
/// are rejected so that typos do not silently fall back to defaults.
ModelConfig parse_model_config(std::string_view json_text, const ModelConfig& base = {});

/// Versioned, human-diffable JSON: kind, config, seed, feature names,
/// classes, scaler and parameters. A non-empty `config_hash` is recorded
/// for provenance and ignored when loading.
std::string model_to_json(const Model& model, const std::string& config_hash = {});
Model model_from_json(std::string_view json_text);

/// Pretty-printed report JSON with per-fold and pooled metrics, both
/// confusion matrices, per-class scores and importances.
std::string report_to_json(const EvaluationReport& report);

/// `true\predicted,<categories>` grid of raw counts, then a blank line and
/// the row-normalized grid. `comment` goes first as `# ...`.
void write_confusion_csv(std::ostream& out, const EvaluationReport& report,
                         const std::string& comment = {});

/// `rank,feature,group,score`.
void write_importance_csv(std::ostream& out, const std::vector<FeatureImportance>& importance,
                          const std::string& comment = {});

}  // namespace txhist::learn

#endif  // TXHIST_LEARN_SERIALIZE_HPP

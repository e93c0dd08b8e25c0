#ifndef TXHIST_CLI_COMMANDS_HPP
#define TXHIST_CLI_COMMANDS_HPP

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "txhist/cli/run_config.hpp"
#include "txhist/ingest.hpp"
#include "txhist/learn/dataset.hpp"
#include "txhist/summarize.hpp"

namespace txhist::cli {

inline constexpr const char* kEntitiesFile = "entities.csv";
inline constexpr const char* kFeaturesFile = "features.csv";
inline constexpr const char* kExtractReportFile = "extract.json";
inline constexpr const char* kModelFile = "model.json";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kConfusionFile = "confusion.csv";
inline constexpr const char* kImportanceFile = "importance.csv";

struct Extraction {
  learn::Dataset data;
  /// Labeled subjects without a single valid transaction; not in `data`.
  std::size_t dropped = 0;
  SummaryDiagnostics diagnostics;
};

/// One row per labeled subject (address or entity) with at least one
/// transaction. Address rows follow label order; entity rows follow entity id.
Extraction extract_features(std::span<const Transaction> txs, const RateTable& rates,
                            const LabelSet& labels, const RunConfig& config);

// Each command reads its inputs, writes its files under config.out_dir,
// prints data to `out` and progress or warnings to `err`.
void cmd_cluster(const RunConfig& config, std::ostream& out, std::ostream& err);
void cmd_extract(const RunConfig& config, std::ostream& out, std::ostream& err);
void cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
void cmd_cv(const RunConfig& config, std::ostream& out, std::ostream& err);
void cmd_importance(const RunConfig& config, std::ostream& out, std::ostream& err);
/// Tabulates report JSON files (config.reports) as CSV on `out`.
void cmd_report(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses arguments (without the program name) and runs the subcommand.
/// Returns the process exit code: 0 success, 1 usage error, 2 invalid
/// input, 3 internal invariant failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace txhist::cli

#endif  // TXHIST_CLI_COMMANDS_HPP

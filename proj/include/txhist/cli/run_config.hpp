#ifndef TXHIST_CLI_RUN_CONFIG_HPP
#define TXHIST_CLI_RUN_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "txhist/clustering.hpp"
#include "txhist/learn/dataset.hpp"
#include "txhist/learn/models.hpp"

namespace txhist::cli {

/// Bad flag combination detected after parsing (exit code 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scheme { Address, Entity };

std::string_view scheme_name(Scheme scheme);
Scheme parse_scheme(std::string_view text);

/// Everything a subcommand needs. Paths and the thread count do not affect
/// results and stay out of the serialized form; input files enter it by
/// content digest.
struct RunConfig {
  std::string command;

  std::string transactions;
  std::string rates;
  std::string labels;
  std::string feature_csv;
  std::string model;
  std::string model_config;
  std::vector<std::string> reports;

  Scheme scheme = Scheme::Address;
  learn::FeatureMask mask;
  learn::ModelKind kind = learn::ModelKind::GradientBoosting;
  std::size_t k = 10;
  std::uint64_t seed = 42;
  std::string out_dir = ".";
  bool skip_invalid = false;
  std::size_t max_tx = 0;  // 0: no cap
  unsigned threads = 1;
  bool weighted = true;
  LabelConflictPolicy label_conflict = LabelConflictPolicy::Error;
};

/// Whole file as bytes. Throws InputError when it cannot be read.
std::string read_file(const std::string& path);

/// "fnv1a64:<16 hex digits>" of the bytes.
std::string content_digest(std::string_view bytes);

/// Serialized run configuration plus its hash.
struct Provenance {
  std::string config_json;
  std::string config_hash;
  std::uint64_t seed = 0;

  /// Metadata line for CSV outputs (without the leading "# ").
  std::string comment() const;
};

/// `digests` maps input roles (transactions, rates, labels, feature_csv,
/// model, model_config) to content digests; absent roles serialize as null.
Provenance make_provenance(const RunConfig& config, const learn::ModelConfig& hyper,
                           const std::map<std::string, std::string>& digests);

}  // namespace txhist::cli

#endif  // TXHIST_CLI_RUN_CONFIG_HPP

#include <CLI11.hpp>

#include <thread>

#include "txhist/cli/commands.hpp"

namespace txhist::cli {

namespace {

struct Flags {
  std::string scheme = "address";
  std::string features = "all";
  std::string model = "gbt";
  std::string label_conflict = "error";
  bool unweighted = false;
};

const CLI::Validator kFeatureMask(
    [](std::string& text) -> std::string {
      try {
        learn::FeatureMask::parse(text);
        return {};
      } catch (const std::exception& e) {
        return e.what();
      }
    },
    "MASK");

void add_common(CLI::App* sub, RunConfig& config) {
  sub->add_option("--out-dir,-o", config.out_dir, "Directory for output files")
      ->capture_default_str();
  sub->add_option("--threads,-j", config.threads, "Worker threads (0: all cores)")
      ->capture_default_str();
  sub->add_option("--seed", config.seed, "Random seed")->capture_default_str();
  sub->add_option("--model-config", config.model_config, "Hyperparameter JSON file");
}

void add_raw_inputs(CLI::App* sub, RunConfig& config, Flags& flags) {
  sub->add_option("--tx", config.transactions, "Transactions, one JSON record per line");
  sub->add_option("--rates", config.rates, "Daily USD/BTC rates CSV");
  sub->add_option("--labels", config.labels, "Address labels CSV");
  sub->add_option("--scheme", flags.scheme, "Subject scheme")
      ->check(CLI::IsMember({"address", "entity"}))
      ->capture_default_str();
  sub->add_flag("--skip-invalid", config.skip_invalid, "Count and drop invalid transactions");
  sub->add_option("--max-tx", config.max_tx, "Summarize at most N transactions per subject");
  sub->add_option("--label-conflict", flags.label_conflict,
                  "Entities whose members carry different labels")
      ->check(CLI::IsMember({"error", "majority"}))
      ->capture_default_str();
}

void add_learning(CLI::App* sub, RunConfig& config, Flags& flags) {
  add_raw_inputs(sub, config, flags);
  sub->add_option("--feature-csv", config.feature_csv, "Feature CSV written by extract");
  sub->add_option("--features", flags.features, "Feature groups: all or basic,extra,moments")
      ->check(kFeatureMask)
      ->capture_default_str();
  sub->add_option("--model", flags.model, "Classifier")
      ->check(CLI::IsMember({"logistic", "perceptron", "tree", "forest", "gbt"}))
      ->capture_default_str();
  sub->add_flag("--unweighted", flags.unweighted, "Disable cost-sensitive class weights");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Bitcoin transaction history summarization and classification", "txhist");
  app.set_config("--config", "", "TOML file with flag values");
  app.require_subcommand(1);

  RunConfig config;
  Flags flags;

  auto* cluster = app.add_subcommand("cluster", "Group addresses into entities");
  cluster->add_option("--tx", config.transactions, "Transactions, one JSON record per line");
  cluster->add_option("--labels", config.labels, "Labels; labeled output-only addresses kept");
  cluster->add_flag("--skip-invalid", config.skip_invalid, "Count and drop invalid transactions");
  add_common(cluster, config);

  auto* extract = app.add_subcommand("extract", "Write the 64-feature CSV for labeled subjects");
  add_raw_inputs(extract, config, flags);
  add_common(extract, config);

  auto* train = app.add_subcommand("train", "Train a classifier on all subjects");
  add_learning(train, config, flags);
  add_common(train, config);

  auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  add_learning(cv, config, flags);
  cv->add_option("--k", config.k, "Number of folds")->capture_default_str();
  add_common(cv, config);

  auto* importance = app.add_subcommand("importance", "Information-gain feature ranking");
  add_learning(importance, config, flags);
  importance->add_option("--model-file", config.model, "Trained model JSON");
  add_common(importance, config);

  auto* report = app.add_subcommand("report", "Tabulate cross-validation reports");
  report->add_option("reports", config.reports, "report.json files")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    config.command = app.get_subcommands().front()->get_name();
    config.scheme = parse_scheme(flags.scheme);
    config.mask = learn::FeatureMask::parse(flags.features);
    config.kind = learn::parse_model_kind(flags.model);
    config.weighted = !flags.unweighted;
    config.label_conflict =
        flags.label_conflict == "majority" ? LabelConflictPolicy::Majority : LabelConflictPolicy::Error;
    if (config.threads == 0) config.threads = std::max(1u, std::thread::hardware_concurrency());

    if (config.command == "cluster") cmd_cluster(config, out, err);
    else if (config.command == "extract") cmd_extract(config, out, err);
    else if (config.command == "train") cmd_train(config, out, err);
    else if (config.command == "cv") cmd_cv(config, out, err);
    else if (config.command == "importance") cmd_importance(config, out, err);
    else cmd_report(config, out, err);
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ContractViolation& e) {
    err << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace txhist::cli

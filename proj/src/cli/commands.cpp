#include "txhist/cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "txhist/clustering.hpp"
#include "txhist/format.hpp"
#include "txhist/learn/cross_validate.hpp"
#include "txhist/learn/preprocess.hpp"
#include "txhist/learn/serialize.hpp"

namespace txhist::cli {

namespace {

using Json = nlohmann::ordered_json;
using Digests = std::map<std::string, std::string>;

std::string load(const std::string& path, const char* role, Digests& digests) {
  std::string text = read_file(path);
  digests[role] = content_digest(text);
  return text;
}

learn::ModelConfig hyperparameters(const RunConfig& config, Digests& digests) {
  if (config.model_config.empty()) return {};
  return learn::parse_model_config(load(config.model_config, "model_config", digests));
}

void write_output(const RunConfig& config, const char* name, const std::string& bytes) {
  const std::filesystem::path dir(config.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw InputError("cannot write '" + path.string() + "'");
  }
}

void require(bool condition, const std::string& message) {
  if (!condition) throw UsageError(message);
}

struct RawInputs {
  std::vector<Transaction> txs;
  ParseStats parse;
  RateTable rates;
  LabelSet labels;
};

RawInputs load_raw(const RunConfig& config, Digests& digests, std::ostream& err) {
  require(!config.transactions.empty() && !config.rates.empty() && !config.labels.empty(),
          config.command + " needs --tx, --rates and --labels");
  RawInputs raw;
  {
    std::istringstream in(load(config.transactions, "transactions", digests));
    raw.txs = parse_transactions(in, {config.skip_invalid}, &raw.parse);
  }
  {
    std::istringstream in(load(config.rates, "rates", digests));
    raw.rates = parse_rate_table(in);
  }
  {
    std::istringstream in(load(config.labels, "labels", digests));
    raw.labels = parse_labels(in);
  }
  err << config.command << ": " << raw.parse.records << " transactions";
  if (raw.parse.skipped) err << ", " << raw.parse.skipped << " invalid skipped";
  err << ", " << raw.labels.size() << " labeled addresses\n";
  return raw;
}

Json ingest_json(const RawInputs& raw, const Extraction& ex) {
  Json j;
  j["transactions"] = raw.parse.records;
  j["invalid_skipped"] = raw.parse.skipped;
  j["labeled_addresses"] = raw.labels.size();
  j["subjects"] = ex.data.rows();
  j["subjects_dropped"] = ex.dropped;
  j["missing_rate_lookups"] = ex.diagnostics.missing_rate_lookups;
  j["negative_balances"] = ex.diagnostics.negative_balances;
  return j;
}

void warn_extraction(const Extraction& ex, std::ostream& err) {
  if (ex.dropped) {
    err << "warning: dropped " << ex.dropped << " labeled subjects with zero valid transactions\n";
  }
  if (ex.diagnostics.missing_rate_lookups) {
    err << "warning: " << ex.diagnostics.missing_rate_lookups
        << " amounts had no exchange rate within 7 days and count as 0 USD\n";
  }
}

/// Dataset from --feature-csv or from raw inputs; `ingest` receives the
/// extraction counters in the latter case.
learn::Dataset load_dataset(const RunConfig& config, Digests& digests, std::ostream& err,
                            Json* ingest) {
  const bool raw = !config.transactions.empty() || !config.rates.empty() || !config.labels.empty();
  require(raw != !config.feature_csv.empty(),
          config.command + " needs either --feature-csv or --tx/--rates/--labels");
  if (!raw) {
    std::istringstream in(load(config.feature_csv, "feature_csv", digests));
    return learn::read_feature_csv(in);
  }
  const RawInputs inputs = load_raw(config, digests, err);
  Extraction ex = extract_features(inputs.txs, inputs.rates, inputs.labels, config);
  warn_extraction(ex, err);
  if (ingest) *ingest = ingest_json(inputs, ex);
  return std::move(ex.data);
}

learn::Dataset masked(const learn::Dataset& data, const learn::FeatureMask& mask) {
  if (data.cols() != kNumFeatures) {
    if (mask != learn::FeatureMask{}) {
      throw InputError("feature masks need the full " + std::to_string(kNumFeatures) +
                       "-column feature set");
    }
    return data;
  }
  const auto columns = mask.columns();
  return data.select_columns(columns);
}

learn::Model train_model(const RunConfig& config, const learn::ModelConfig& hyper,
                         learn::Dataset data) {
  if (data.rows() == 0) throw InputError("no labeled subjects to train on");
  if (config.weighted) data.weights = learn::sample_weights(data.labels);
  return learn::train(config.kind, data, hyper, config.seed, config.threads);
}

std::string importance_csv(const std::vector<learn::FeatureImportance>& importance,
                           const Provenance& p) {
  std::ostringstream out;
  learn::write_importance_csv(out, importance, p.comment());
  return out.str();
}

}  // namespace

Extraction extract_features(std::span<const Transaction> txs, const RateTable& rates,
                            const LabelSet& labels, const RunConfig& config) {
  const AddressIndex index(txs);
  std::vector<std::string> subjects;
  std::vector<Category> categories;
  std::vector<TransactionHistory> histories;
  Extraction ex;

  auto keep = [&](TransactionHistory history, Category category) {
    if (history.entries.empty()) {
      ++ex.dropped;
      return;
    }
    if (config.max_tx) history = truncate(std::move(history), config.max_tx);
    subjects.push_back(history.subject);
    categories.push_back(category);
    histories.push_back(std::move(history));
  };

  if (config.scheme == Scheme::Address) {
    for (const auto& [address, category] : labels.entries()) {
      keep(address_history(address, index), category);
    }
  } else {
    const EntityMap map = build_entities(txs, &labels);
    std::set<EntityId> ids;
    for (const auto& [address, category] : labels.entries()) {
      if (const auto id = map.entity_of(address)) {
        ids.insert(*id);
      } else {
        ++ex.dropped;
      }
    }
    for (EntityId id : ids) {
      const auto category = entity_category(id, map, labels, config.label_conflict);
      if (!category) throw ContractViolation("labeled entity without a category");
      keep(entity_history(id, map, index), *category);
    }
  }

  const auto features = summarize_all(histories, rates, config.threads, &ex.diagnostics);
  ex.data = learn::make_dataset(std::move(subjects), std::move(categories), features);
  return ex;
}

void cmd_cluster(const RunConfig& config, std::ostream& out, std::ostream& err) {
  require(!config.transactions.empty(), "cluster needs --tx");
  Digests digests;
  ParseStats stats;
  std::vector<Transaction> txs;
  {
    std::istringstream in(load(config.transactions, "transactions", digests));
    txs = parse_transactions(in, {config.skip_invalid}, &stats);
  }
  LabelSet labels;
  if (!config.labels.empty()) {
    std::istringstream in(load(config.labels, "labels", digests));
    labels = parse_labels(in);
  }
  const learn::ModelConfig hyper = hyperparameters(config, digests);
  const Provenance p = make_provenance(config, hyper, digests);

  const EntityMap map = build_entities(txs, config.labels.empty() ? nullptr : &labels);
  std::vector<std::pair<std::string_view, EntityId>> rows;
  std::map<std::size_t, std::size_t> histogram;
  for (EntityId id = 0; id < map.entity_count(); ++id) {
    const auto& members = map.members(id);
    ++histogram[members.size()];
    for (const auto& address : members) rows.emplace_back(address, id);
  }
  std::sort(rows.begin(), rows.end());

  std::ostringstream csv;
  csv << "# " << p.comment() << "\naddress,entity_id\n";
  for (const auto& [address, id] : rows) csv << address << ',' << id << '\n';
  write_output(config, kEntitiesFile, csv.str());

  err << "cluster: " << stats.records << " transactions";
  if (stats.skipped) err << ", " << stats.skipped << " invalid skipped";
  err << '\n';
  out << "entities," << map.entity_count() << "\naddresses," << map.address_count()
      << "\nsize,count\n";
  for (const auto& [size, count] : histogram) out << size << ',' << count << '\n';
}

void cmd_extract(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Digests digests;
  const RawInputs raw = load_raw(config, digests, err);
  const learn::ModelConfig hyper = hyperparameters(config, digests);
  const Provenance p = make_provenance(config, hyper, digests);
  const Extraction ex = extract_features(raw.txs, raw.rates, raw.labels, config);
  warn_extraction(ex, err);

  std::ostringstream csv;
  learn::write_feature_csv(csv, ex.data, p.comment());
  write_output(config, kFeaturesFile, csv.str());

  Json report;
  report["config_hash"] = p.config_hash;
  report["seed"] = p.seed;
  report["config"] = Json::parse(p.config_json);
  report["ingest"] = ingest_json(raw, ex);
  write_output(config, kExtractReportFile, report.dump(2) + "\n");
  out << "subjects," << ex.data.rows() << "\ndropped," << ex.dropped << '\n';
}

void cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Digests digests;
  const learn::Dataset data = load_dataset(config, digests, err, nullptr);
  const learn::ModelConfig hyper = hyperparameters(config, digests);
  const Provenance p = make_provenance(config, hyper, digests);
  const learn::Model model = train_model(config, hyper, masked(data, config.mask));
  write_output(config, kModelFile, learn::model_to_json(model, p.config_hash));
  out << "model," << learn::model_kind_name(model.kind) << "\nclasses," << model.num_classes()
      << "\nrows," << data.rows() << '\n';
}

void cmd_cv(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Digests digests;
  Json ingest;
  const learn::Dataset data = load_dataset(config, digests, err, &ingest);
  const learn::ModelConfig hyper = hyperparameters(config, digests);
  const Provenance p = make_provenance(config, hyper, digests);

  learn::CvOptions options;
  options.k = config.k;
  options.seed = config.seed;
  options.mask = config.mask;
  options.weighted = config.weighted;
  options.threads = config.threads;
  learn::EvaluationReport report = learn::cross_validate(data, config.kind, hyper, options);
  report.config_json = p.config_json;
  report.config_hash = p.config_hash;
  if (report.degenerate_folds) {
    err << "warning: " << report.degenerate_folds << " folds trained on a single category\n";
  }

  std::string json = learn::report_to_json(report);
  if (!ingest.is_null()) {
    Json j = Json::parse(json);
    j["ingest"] = std::move(ingest);
    json = j.dump(2) + "\n";
  }
  write_output(config, kReportFile, json);
  std::ostringstream confusion;
  learn::write_confusion_csv(confusion, report, p.comment());
  write_output(config, kConfusionFile, confusion.str());
  write_output(config, kImportanceFile, importance_csv(report.importance, p));

  out << "micro_f1," << format_double(report.micro_f1_mean) << "\nmacro_f1,"
      << format_double(report.macro_f1_mean) << '\n';
}

void cmd_importance(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Digests digests;
  learn::Model model;
  learn::ModelConfig hyper;
  if (!config.model.empty()) {
    require(config.feature_csv.empty() && config.transactions.empty(),
            "importance takes either --model or training data, not both");
    model = learn::model_from_json(load(config.model, "model", digests));
    hyper = model.config;
  } else {
    const learn::Dataset data = load_dataset(config, digests, err, nullptr);
    hyper = hyperparameters(config, digests);
    model = train_model(config, hyper, masked(data, config.mask));
  }
  const Provenance p = make_provenance(config, hyper, digests);
  const auto importance = learn::feature_importance(model);
  write_output(config, kImportanceFile, importance_csv(importance, p));
  out << "rank,feature,score\n";
  for (std::size_t r = 0; r < importance.size() && r < 10; ++r) {
    out << r + 1 << ',' << importance[r].name << ',' << format_double(importance[r].score) << '\n';
  }
}

void cmd_report(const RunConfig& config, std::ostream& out, std::ostream&) {
  require(!config.reports.empty(), "report needs at least one report JSON file");
  out << "report,model,features,k,seed,weighted,micro_f1_mean,macro_f1_mean,pooled_micro_f1,"
         "pooled_macro_f1,config_hash\n";
  for (const auto& path : config.reports) {
    Json j;
    try {
      j = Json::parse(read_file(path));
      out << path << ',' << j.at("model").get<std::string>() << ','
          << j.at("features").get<std::string>() << ',' << j.at("k").get<std::size_t>() << ','
          << j.at("seed").get<std::uint64_t>() << ',' << (j.at("weighted").get<bool>() ? 1 : 0)
          << ',' << format_double(j.at("micro_f1_mean").get<double>()) << ','
          << format_double(j.at("macro_f1_mean").get<double>()) << ','
          << format_double(j.at("pooled").at("micro_f1").get<double>()) << ','
          << format_double(j.at("pooled").at("macro_f1").get<double>()) << ','
          << j.at("config_hash").get<std::string>() << '\n';
    } catch (const nlohmann::json::exception& e) {
      throw InputError("'" + path + "' is not a report: " + e.what());
    }
  }
}

}  // namespace txhist::cli

#include "txhist/cli/run_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "txhist/format.hpp"
#include "txhist/learn/serialize.hpp"

namespace txhist::cli {

std::string_view scheme_name(Scheme scheme) {
  return scheme == Scheme::Address ? "address" : "entity";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "address") return Scheme::Address;
  if (text == "entity") return Scheme::Entity;
  throw UsageError("unknown scheme '" + std::string(text) + "' (address, entity)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw InputError("cannot read '" + path + "'");
  return std::move(buffer).str();
}

std::string content_digest(std::string_view bytes) { return "fnv1a64:" + hex64(fnv1a64(bytes)); }

std::string Provenance::comment() const {
  return "config_hash=" + config_hash + " seed=" + std::to_string(seed);
}

Provenance make_provenance(const RunConfig& config, const learn::ModelConfig& hyper,
                           const std::map<std::string, std::string>& digests) {
  using Json = nlohmann::ordered_json;
  Json j;
  j["command"] = config.command;
  Json inputs = Json::object();
  for (const char* role : {"transactions", "rates", "labels", "feature_csv", "model", "model_config"}) {
    const auto it = digests.find(role);
    inputs[role] = it == digests.end() ? Json(nullptr) : Json(it->second);
  }
  j["inputs"] = std::move(inputs);
  j["scheme"] = scheme_name(config.scheme);
  j["features"] = config.mask.to_string();
  j["model"] = learn::model_kind_name(config.kind);
  j["k"] = config.k;
  j["seed"] = config.seed;
  j["skip_invalid"] = config.skip_invalid;
  j["max_tx"] = config.max_tx ? Json(config.max_tx) : Json(nullptr);
  j["weighted"] = config.weighted;
  j["label_conflict"] = config.label_conflict == LabelConflictPolicy::Error ? "error" : "majority";
  j["hyperparameters"] = Json::parse(learn::model_config_to_json(hyper));

  Provenance p;
  p.config_json = j.dump();
  p.config_hash = hex64(fnv1a64(p.config_json));
  p.seed = config.seed;
  return p;
}

}  // namespace txhist::cli

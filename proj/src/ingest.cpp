#include "txhist/ingest.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>

#include <json.hpp>

#include "txhist/format.hpp"

namespace txhist {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

const json& require(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw InputError(std::string("missing field '") + key + "'", line);
  return *it;
}

std::uint64_t require_uint(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
    throw ValidationError(std::string("negative value for '") + key + "'", line);
  }
  if (!v.is_number_unsigned()) {
    throw InputError(std::string("field '") + key + "' must be a non-negative integer", line);
  }
  return v.get<std::uint64_t>();
}

Satoshi require_sat(const json& obj, std::size_t line) {
  const std::uint64_t v = require_uint(obj, "sat", line);
  if (v > static_cast<std::uint64_t>(std::numeric_limits<Satoshi>::max())) {
    throw ValidationError("satoshi value out of range", line);
  }
  return static_cast<Satoshi>(v);
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_string()) throw InputError(std::string("field '") + key + "' must be a string", line);
  return v.get<std::string>();
}

const json& require_array(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_array()) throw InputError(std::string("field '") + key + "' must be an array", line);
  return v;
}

// Splits "a,b" into exactly two fields.
bool split2(std::string_view line, std::string_view& first, std::string_view& second) {
  const auto comma = line.find(',');
  if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
    return false;
  }
  first = trim(line.substr(0, comma));
  second = trim(line.substr(comma + 1));
  return true;
}

void expect_header(std::istream& in, std::string_view header, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(std::string(what) + ": missing header", 1);
  if (trim(line) != header) {
    throw InputError(std::string(what) + ": expected header '" + std::string(header) + "'", 1);
  }
}

}  // namespace

void LabelSet::insert(const std::string& address, Category category, std::size_t line) {
  const auto [it, inserted] = labels_.emplace(address, category);
  if (!inserted && it->second != category) {
    throw InputError("conflicting labels for address " + address + ": " +
                         std::string(category_name(it->second)) + " vs " +
                         std::string(category_name(category)),
                     line);
  }
}

const Category* LabelSet::find(std::string_view address) const {
  const auto it = labels_.find(address);
  return it == labels_.end() ? nullptr : &it->second;
}

Transaction parse_transaction_record(std::string_view line, std::size_t line_number) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what(), line_number);
  }
  if (!obj.is_object()) throw InputError("record must be a JSON object", line_number);

  Transaction tx;
  tx.txid = require_string(obj, "txid", line_number);
  tx.block_height = require_uint(obj, "height", line_number);
  const std::uint64_t time = require_uint(obj, "time", line_number);
  if (time > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    throw ValidationError("time out of range", line_number);
  }
  tx.timestamp = static_cast<std::int64_t>(time);
  tx.position_in_block = require_uint(obj, "pos", line_number);
  for (const json& in : require_array(obj, "in", line_number)) {
    if (!in.is_object()) throw InputError("input must be an object", line_number);
    tx.inputs.push_back({require_string(in, "addr", line_number), require_sat(in, line_number)});
  }
  for (const json& out : require_array(obj, "out", line_number)) {
    if (!out.is_object()) throw InputError("output must be an object", line_number);
    tx.outputs.push_back({require_string(out, "addr", line_number), require_sat(out, line_number)});
  }
  validate(tx, line_number);
  return tx;
}

std::string format_transaction_record(const Transaction& tx) {
  nlohmann::ordered_json obj;
  obj["txid"] = tx.txid;
  obj["height"] = tx.block_height;
  obj["time"] = tx.timestamp;
  obj["pos"] = tx.position_in_block;
  auto& ins = obj["in"] = nlohmann::ordered_json::array();
  for (const auto& in : tx.inputs) {
    nlohmann::ordered_json e;
    e["addr"] = in.address;
    e["sat"] = in.value;
    ins.push_back(std::move(e));
  }
  auto& outs = obj["out"] = nlohmann::ordered_json::array();
  for (const auto& out : tx.outputs) {
    nlohmann::ordered_json e;
    e["addr"] = out.address;
    e["sat"] = out.value;
    outs.push_back(std::move(e));
  }
  return obj.dump();
}

ParseStats for_each_transaction(std::istream& in, const std::function<void(Transaction&&)>& sink,
                                const ParseOptions& options) {
  ParseStats stats;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) {
      ++stats.blank_lines;
      continue;
    }
    Transaction tx;
    try {
      tx = parse_transaction_record(line, line_number);
    } catch (const InputError&) {
      if (!options.skip_invalid) throw;
      ++stats.skipped;
      continue;
    }
    ++stats.records;
    sink(std::move(tx));
  }
  if (in.bad()) throw InputError("read error after line " + std::to_string(line_number));
  return stats;
}

std::vector<Transaction> parse_transactions(std::istream& in, const ParseOptions& options,
                                            ParseStats* stats) {
  std::vector<Transaction> txs;
  const ParseStats s =
      for_each_transaction(in, [&](Transaction&& tx) { txs.push_back(std::move(tx)); }, options);
  if (stats) *stats = s;
  return txs;
}

void write_transactions(std::ostream& out, const std::vector<Transaction>& txs) {
  for (const auto& tx : txs) out << format_transaction_record(tx) << '\n';
}

RateTable parse_rate_table(std::istream& in) {
  expect_header(in, "date,usd_per_btc", "rates");
  RateTable table;
  std::string line;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    std::string_view date_text, rate_text;
    if (!split2(text, date_text, rate_text)) throw InputError("expected 'date,usd_per_btc'", line_number);
    const auto day = parse_iso_date(date_text);
    if (!day) throw InputError("unparseable date '" + std::string(date_text) + "'", line_number);
    double rate = 0.0;
    const auto [p, ec] = std::from_chars(rate_text.data(), rate_text.data() + rate_text.size(), rate);
    if (ec != std::errc() || p != rate_text.data() + rate_text.size()) {
      throw InputError("unparseable rate '" + std::string(rate_text) + "'", line_number);
    }
    try {
      table.insert(*day, rate);
    } catch (const InputError& e) {
      throw InputError(e.what(), line_number);
    }
  }
  return table;
}

void write_rate_table(std::ostream& out, const RateTable& rates) {
  out << "date,usd_per_btc\n";
  for (const auto& [day, rate] : rates.entries()) {
    out << format_iso_date(day) << ',' << format_double(rate) << '\n';
  }
}

LabelSet parse_labels(std::istream& in) {
  expect_header(in, "address,category", "labels");
  LabelSet labels;
  std::string line;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    std::string_view address, category;
    if (!split2(text, address, category) || address.empty()) {
      throw InputError("expected 'address,category'", line_number);
    }
    Category c;
    try {
      c = parse_category(category);
    } catch (const InputError& e) {
      throw InputError(e.what(), line_number);
    }
    labels.insert(std::string(address), c, line_number);
  }
  return labels;
}

void write_labels(std::ostream& out, const LabelSet& labels) {
  out << "address,category\n";
  for (const auto& [address, category] : labels.entries()) {
    out << address << ',' << category_name(category) << '\n';
  }
}

}  // namespace txhist

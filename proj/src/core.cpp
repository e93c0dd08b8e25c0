#include "txhist/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <tuple>

namespace txhist {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

bool is_hex64(std::string_view s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return std::isxdigit(static_cast<unsigned char>(c)) != 0;
         });
}

std::array<std::string, kNumFeatures> make_feature_names() {
  std::array<std::string, kNumFeatures> names;
  int i = 0;
  names[i++] = "f_tx";
  names[i++] = "r_received";
  names[i++] = "r_coinbase";
  for (const char* side : {"f_spent_1e", "f_received_1e"}) {
    for (int e = kMinMagnitudeExponent; e < kMinMagnitudeExponent + kNumMagnitudeBins; ++e) {
      names[i++] = side + std::to_string(e);
    }
  }
  for (const char* n : {"r_payback", "n_inputs_mean", "n_outputs_mean", "lifetime", "btc_spent",
                        "btc_received", "usd_spent", "usd_received", "n_tx", "n_spent",
                        "n_received", "n_coinbase", "n_payback", "balance_btc_mean",
                        "balance_btc_std", "balance_usd_mean", "balance_usd_std"}) {
    names[i++] = n;
  }
  for (const char* dist : {"overall", "spent", "received", "coinbase", "payback", "interval"}) {
    for (int m = 1; m <= 4; ++m) names[i++] = "m" + std::to_string(m) + "_" + dist;
  }
  return names;
}

}  // namespace

std::string_view category_name(Category c) {
  switch (c) {
    case Category::Exchange: return "Exchange";
    case Category::Faucet: return "Faucet";
    case Category::Gambling: return "Gambling";
    case Category::HYIP: return "HYIP";
    case Category::Market: return "Market";
    case Category::Mixer: return "Mixer";
    case Category::Pool: return "Pool";
  }
  throw ContractViolation("unknown category ordinal");
}

Category parse_category(std::string_view name) {
  for (Category c : kAllCategories) {
    if (iequals(name, category_name(c))) return c;
  }
  std::string valid;
  for (Category c : kAllCategories) {
    if (!valid.empty()) valid += ", ";
    valid += category_name(c);
  }
  throw InputError("unknown category '" + std::string(name) + "' (expected one of: " + valid + ")");
}

std::optional<Day> parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto digits = [](std::string_view s, auto& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
  };
  if (!digits(text.substr(0, 4), y) || !digits(text.substr(5, 2), m) ||
      !digits(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

std::string format_iso_date(Day day) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{day}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Satoshi Transaction::input_total() const {
  Satoshi total = 0;
  for (const auto& in : inputs) total += in.value;
  return total;
}

Satoshi Transaction::output_total() const {
  Satoshi total = 0;
  for (const auto& out : outputs) total += out.value;
  return total;
}

void validate(const Transaction& tx, std::size_t line) {
  if (!is_hex64(tx.txid)) throw ValidationError("txid must be 64 hex characters", line);
  if (tx.outputs.empty()) throw ValidationError("transaction has no outputs", line);
  if (tx.inputs.empty()) throw ValidationError("non-coinbase transaction has no inputs", line);
  const bool coinbase = std::any_of(tx.inputs.begin(), tx.inputs.end(),
                                    [](const TxInput& in) { return in.is_coinbase(); });
  if (coinbase && tx.inputs.size() != 1) {
    throw ValidationError("coinbase input must be the only input", line);
  }
  for (const auto& in : tx.inputs) {
    if (in.value < 0) throw ValidationError("negative input value", line);
    if (in.address.empty()) throw ValidationError("empty input address", line);
  }
  for (const auto& out : tx.outputs) {
    if (out.value < 0) throw ValidationError("negative output value", line);
    if (out.address.empty()) throw ValidationError("empty output address", line);
    if (out.address == kCoinbaseAddress) {
      throw ValidationError("COINBASE sentinel is not a valid output address", line);
    }
  }
}

bool canonical_less(const Transaction& a, const Transaction& b) {
  return std::tie(a.block_height, a.position_in_block, a.txid) <
         std::tie(b.block_height, b.position_in_block, b.txid);
}

std::string_view role_name(RoleKind kind) {
  switch (kind) {
    case RoleKind::Coinbase: return "coinbase";
    case RoleKind::Spent: return "spent";
    case RoleKind::Received: return "received";
  }
  return "?";
}

bool TransactionHistory::owns(std::string_view address) const {
  return std::binary_search(addresses.begin(), addresses.end(), address);
}

const std::array<std::string, kNumFeatures>& feature_names() {
  static const auto names = make_feature_names();
  return names;
}

int feature_index(std::string_view name) {
  const auto& names = feature_names();
  const auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

FeatureGroup feature_group(int index) {
  if (index < kExtraOffset) return FeatureGroup::Basic;
  if (index < kMomentOffset) return FeatureGroup::Extra;
  return FeatureGroup::Moments;
}

void RateTable::insert(Day day, double usd_per_btc) {
  if (!(usd_per_btc > 0.0) || !std::isfinite(usd_per_btc)) {
    throw InputError("rate for " + format_iso_date(day) + " must be positive");
  }
  if (!rates_.emplace(day, usd_per_btc).second) {
    throw InputError("duplicate rate date " + format_iso_date(day));
  }
}

RateLookup RateTable::lookup(Day day) const {
  auto it = rates_.upper_bound(day);
  if (it == rates_.begin()) return {};
  --it;
  if (day - it->first > kMaxLookback) return {};
  return {it->second, true};
}

}  // namespace txhist

#include "txhist/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "txhist/parallel.hpp"

namespace txhist {

namespace {

double to_btc(Satoshi sat) { return static_cast<double>(sat) / static_cast<double>(kSatoshiPerBtc); }

double usd_at(Satoshi sat, const RateLookup& rate) {
  return rate.found ? to_btc(sat) * rate.usd_per_btc : 0.0;
}

void require_non_empty(const TransactionHistory& history) {
  if (history.empty()) {
    throw ContractViolation("cannot summarize empty history of '" + history.subject + "'");
  }
}

SubjectAccumulator accumulate(const TransactionHistory& history, const RateTable& rates) {
  require_non_empty(history);
  SubjectAccumulator acc;
  for (const auto& entry : history.entries) {
    const auto inv = involvement(*entry.tx, [&](std::string_view a) { return history.owns(a); });
    acc.add(*entry.tx, inv, entry.role, rates);
  }
  return acc;
}

}  // namespace

TxRole role_of(const Transaction& tx, const Involvement& inv) {
  TxRole role;
  if (tx.is_coinbase()) {
    role.kind = RoleKind::Coinbase;
  } else if (inv.in_inputs) {
    role.kind = RoleKind::Spent;
  } else {
    role.kind = RoleKind::Received;
  }
  role.payback = inv.in_inputs && inv.in_outputs;
  return role;
}

TxRole assign_role(const Transaction& tx, std::span<const std::string> subject_addresses) {
  const auto inv = involvement(tx, [&](std::string_view a) {
    return std::binary_search(subject_addresses.begin(), subject_addresses.end(), a);
  });
  if (!inv.mentioned()) {
    throw ContractViolation("transaction " + tx.txid + " does not mention the subject");
  }
  return role_of(tx, inv);
}

TransactionHistory make_history(std::string subject, std::vector<std::string> addresses,
                                std::vector<const Transaction*> txs) {
  std::sort(addresses.begin(), addresses.end());
  addresses.erase(std::unique(addresses.begin(), addresses.end()), addresses.end());
  std::sort(txs.begin(), txs.end(),
            [](const Transaction* a, const Transaction* b) { return canonical_less(*a, *b); });
  txs.erase(std::unique(txs.begin(), txs.end(),
                        [](const Transaction* a, const Transaction* b) { return a->txid == b->txid; }),
            txs.end());

  TransactionHistory history;
  history.subject = std::move(subject);
  history.addresses = std::move(addresses);
  history.entries.reserve(txs.size());
  for (const Transaction* tx : txs) {
    history.entries.push_back({tx, assign_role(*tx, history.addresses)});
  }
  return history;
}

TransactionHistory truncate(TransactionHistory history, std::size_t max_tx) {
  if (history.entries.size() > max_tx) history.entries.resize(max_tx);
  return history;
}

double usd_value(Satoshi sat, Day day, const RateTable& rates) {
  return usd_at(sat, rates.lookup(day));
}

std::optional<int> magnitude_bin(double usd) {
  if (!(usd > 0.0) || !std::isfinite(usd)) return std::nullopt;
  int exponent = static_cast<int>(std::floor(std::log10(usd)));
  // log10 may round across a power of ten; correct against exact powers.
  if (std::pow(10.0, exponent + 1) <= usd) ++exponent;
  if (std::pow(10.0, exponent) > usd) --exponent;
  exponent = std::clamp(exponent, kMinMagnitudeExponent,
                        kMinMagnitudeExponent + kNumMagnitudeBins - 1);
  return exponent - kMinMagnitudeExponent;
}

std::vector<double> interval_samples(const TransactionHistory& history) {
  std::vector<double> gaps;
  if (history.size() < 2) return gaps;
  gaps.reserve(history.size() - 1);
  for (std::size_t k = 1; k < history.size(); ++k) {
    gaps.push_back(static_cast<double>(history.entries[k].tx->block_height -
                                       history.entries[k - 1].tx->block_height));
  }
  return gaps;
}

BalanceTrace balance_trace(const TransactionHistory& history, const RateTable& rates) {
  BalanceTrace trace;
  Satoshi sat = 0;
  double usd = 0.0;
  for (const auto& entry : history.entries) {
    const auto inv = involvement(*entry.tx, [&](std::string_view a) { return history.owns(a); });
    const Satoshi delta = inv.owned_out - inv.owned_in;
    sat += delta;
    usd += usd_value(delta, day_of(entry.tx->timestamp), rates);
    if (sat < 0) ++trace.negative_count;
    trace.balance_sat.push_back(sat);
    trace.balance_usd.push_back(usd);
  }
  return trace;
}

// ---------------------------------------------------------------------------

void SubjectAccumulator::add(const Transaction& tx, const Involvement& inv, TxRole role,
                             const RateTable& rates) {
  const Day day = day_of(tx.timestamp);
  const RateLookup rate = rates.lookup(day);
  if (!rate.found) ++diag_.missing_rate_lookups;

  if (n_tx_ == 0) {
    first_day_ = last_day_ = day;
  } else {
    intervals_.add(static_cast<double>(tx.block_height - last_height_));
    first_day_ = std::min(first_day_, day);
    last_day_ = std::max(last_day_, day);
  }
  last_height_ = tx.block_height;
  ++n_tx_;

  const double height = static_cast<double>(tx.block_height);
  heights_[kOverall].add(height);
  switch (role.kind) {
    case RoleKind::Coinbase:
      ++n_coinbase_;
      heights_[kCoinbase].add(height);
      break;
    case RoleKind::Spent: {
      ++n_spent_;
      heights_[kSpent].add(height);
      spent_inputs_ += tx.inputs.size();
      spent_outputs_ += tx.outputs.size();
      if (const auto bin = magnitude_bin(usd_at(inv.owned_in, rate))) {
        ++spent_bins_[*bin];
        ++spent_binned_;
      }
      break;
    }
    case RoleKind::Received: {
      ++n_received_;
      heights_[kReceived].add(height);
      if (const auto bin = magnitude_bin(usd_at(inv.owned_out, rate))) {
        ++received_bins_[*bin];
        ++received_binned_;
      }
      break;
    }
  }
  if (role.payback) {
    ++n_payback_;
    heights_[kPayback].add(height);
  }

  spent_sat_ += inv.owned_in;
  received_sat_ += inv.owned_out;
  spent_usd_ += usd_at(inv.owned_in, rate);
  received_usd_ += usd_at(inv.owned_out, rate);

  const Satoshi delta = inv.owned_out - inv.owned_in;
  balance_sat_ += delta;
  balance_usd_ += usd_at(delta, rate);
  if (balance_sat_ < 0) ++diag_.negative_balances;
  balance_btc_acc_.add(to_btc(balance_sat_));
  balance_usd_acc_.add(balance_usd_);
}

FeatureVector SubjectAccumulator::features() const {
  if (n_tx_ == 0) throw ContractViolation("no transactions accumulated");
  namespace f = feature;
  FeatureVector v = FeatureVector::Zero();
  const double n = static_cast<double>(n_tx_);
  const Day lifetime = last_day_ - first_day_;

  v[f::kTxFrequency] = n / static_cast<double>(std::max<Day>(lifetime, 1));
  v[f::kReceivedRatio] = static_cast<double>(n_received_) / n;
  v[f::kCoinbaseRatio] = static_cast<double>(n_coinbase_) / n;
  for (int b = 0; b < kNumMagnitudeBins; ++b) {
    if (spent_binned_) {
      v[f::kSpentBins + b] =
          static_cast<double>(spent_bins_[b]) / static_cast<double>(spent_binned_);
    }
    if (received_binned_) {
      v[f::kReceivedBins + b] =
          static_cast<double>(received_bins_[b]) / static_cast<double>(received_binned_);
    }
  }
  v[f::kPaybackRatio] = static_cast<double>(n_payback_) / n;
  if (n_spent_) {
    v[f::kMeanInputs] = static_cast<double>(spent_inputs_) / static_cast<double>(n_spent_);
    v[f::kMeanOutputs] = static_cast<double>(spent_outputs_) / static_cast<double>(n_spent_);
  }

  v[f::kLifetime] = static_cast<double>(lifetime);
  v[f::kBtcSpent] = to_btc(spent_sat_);
  v[f::kBtcReceived] = to_btc(received_sat_);
  v[f::kUsdSpent] = spent_usd_;
  v[f::kUsdReceived] = received_usd_;
  v[f::kNumTx] = n;
  v[f::kNumSpent] = static_cast<double>(n_spent_);
  v[f::kNumReceived] = static_cast<double>(n_received_);
  v[f::kNumCoinbase] = static_cast<double>(n_coinbase_);
  v[f::kNumPayback] = static_cast<double>(n_payback_);
  v[f::kBalanceBtcMean] = balance_btc_acc_.mean();
  v[f::kBalanceBtcStd] = std::sqrt(balance_btc_acc_.variance());
  v[f::kBalanceUsdMean] = balance_usd_acc_.mean();
  v[f::kBalanceUsdStd] = std::sqrt(balance_usd_acc_.variance());

  auto put = [&](int offset, const Moments<double>& m) {
    v[offset] = m.m1;
    v[offset + 1] = m.m2;
    v[offset + 2] = m.m3;
    v[offset + 3] = m.m4;
  };
  put(f::kOverallMoments, heights_[kOverall].min_shifted());
  put(f::kSpentMoments, heights_[kSpent].min_shifted());
  put(f::kReceivedMoments, heights_[kReceived].min_shifted());
  put(f::kCoinbaseMoments, heights_[kCoinbase].min_shifted());
  put(f::kPaybackMoments, heights_[kPayback].min_shifted());
  put(f::kIntervalMoments, intervals_.raw());
  return v;
}

BasicStats basic_stats(const TransactionHistory& history, const RateTable& rates) {
  return accumulate(history, rates).features().segment<kNumBasic>(kBasicOffset);
}

ExtraStats extra_stats(const TransactionHistory& history, const RateTable& rates) {
  return accumulate(history, rates).features().segment<kNumExtra>(kExtraOffset);
}

FeatureVector summarize(const TransactionHistory& history, const RateTable& rates,
                        SummaryDiagnostics* diagnostics) {
  const SubjectAccumulator acc = accumulate(history, rates);
  if (diagnostics) {
    diagnostics->missing_rate_lookups += acc.diagnostics().missing_rate_lookups;
    diagnostics->negative_balances += acc.diagnostics().negative_balances;
  }
  return acc.features();
}

std::vector<FeatureVector> summarize_all(std::span<const TransactionHistory> histories,
                                         const RateTable& rates, unsigned threads,
                                         SummaryDiagnostics* diagnostics) {
  std::vector<FeatureVector> out(histories.size());
  std::vector<SummaryDiagnostics> diag(histories.size());
  parallel_for(histories.size(), threads,
               [&](std::size_t i) { out[i] = summarize(histories[i], rates, &diag[i]); });
  if (diagnostics) {
    for (const auto& d : diag) {
      diagnostics->missing_rate_lookups += d.missing_rate_lookups;
      diagnostics->negative_balances += d.negative_balances;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

StreamingSummarizer::StreamingSummarizer(const RateTable& rates, SubjectResolver resolver)
    : rates_(rates),
      resolver_(std::move(resolver)),
      memory_(std::make_shared<AllocationCounter>()),
      states_(StateMap::allocator_type(memory_)) {}

void StreamingSummarizer::add(const Transaction& tx) {
  ++seen_;
  // Distinct subjects touched by this transaction; a handful at most.
  struct Touch {
    std::string_view subject;
    Involvement inv;
  };
  std::vector<Touch> touched;
  auto touch = [&](std::string_view address) -> Involvement* {
    const std::string_view subject = resolver_(address);
    if (subject.empty()) return nullptr;
    for (auto& t : touched) {
      if (t.subject == subject) return &t.inv;
    }
    touched.push_back({subject, {}});
    return &touched.back().inv;
  };
  if (!tx.is_coinbase()) {
    for (const auto& in : tx.inputs) {
      if (Involvement* inv = touch(in.address)) {
        inv->in_inputs = true;
        inv->owned_in += in.value;
      }
    }
  }
  for (const auto& out : tx.outputs) {
    if (Involvement* inv = touch(out.address)) {
      inv->in_outputs = true;
      inv->owned_out += out.value;
    }
  }

  // Zero-padded so that comparisons never read past a short txid.
  std::array<char, 64> txid{};
  std::copy_n(tx.txid.begin(), std::min(tx.txid.size(), txid.size()), txid.begin());
  for (const auto& t : touched) {
    auto it = states_.find(t.subject);
    if (it == states_.end()) {
      it = states_.emplace(Key(t.subject, Key::allocator_type(memory_)), State{}).first;
    } else {
      State& s = it->second;
      const int txid_order = std::memcmp(txid.data(), s.last_txid.data(), txid.size());
      const auto prev = std::tie(s.last_height, s.last_pos);
      const auto cur = std::tie(tx.block_height, tx.position_in_block);
      if (cur == prev && txid_order == 0) {
        ++duplicates_;
        continue;
      }
      if (cur < prev || (cur == prev && txid_order < 0)) {
        throw InputError("transaction " + tx.txid + " out of canonical order for subject " +
                         std::string(t.subject));
      }
    }
    State& s = it->second;
    s.acc.add(tx, t.inv, role_of(tx, t.inv), rates_);
    s.last_height = tx.block_height;
    s.last_pos = tx.position_in_block;
    s.last_txid = txid;
  }
}

std::vector<std::pair<std::string, FeatureVector>> StreamingSummarizer::results() const {
  std::vector<std::pair<std::string, FeatureVector>> out;
  out.reserve(states_.size());
  for (const auto& [key, state] : states_) {
    out.emplace_back(std::string(key), state.acc.features());
  }
  return out;
}

SummaryDiagnostics StreamingSummarizer::diagnostics() const {
  SummaryDiagnostics total;
  for (const auto& [key, state] : states_) {
    total.missing_rate_lookups += state.acc.diagnostics().missing_rate_lookups;
    total.negative_balances += state.acc.diagnostics().negative_balances;
  }
  return total;
}

}  // namespace txhist

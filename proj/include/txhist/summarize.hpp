#ifndef TXHIST_SUMMARIZE_HPP
#define TXHIST_SUMMARIZE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "txhist/core.hpp"
#include "txhist/counting_allocator.hpp"
#include "txhist/moments.hpp"

namespace txhist {

// ---------------------------------------------------------------------------
// Transaction roles

/// How one transaction touches a subject's address set.
struct Involvement {
  bool in_inputs = false;
  bool in_outputs = false;
  Satoshi owned_in = 0;   // subject-owned input value
  Satoshi owned_out = 0;  // value paid to subject addresses

  bool mentioned() const { return in_inputs || in_outputs; }
};

template <typename Owns>
Involvement involvement(const Transaction& tx, Owns&& owns) {
  Involvement inv;
  if (!tx.is_coinbase()) {
    for (const auto& in : tx.inputs) {
      if (owns(std::string_view(in.address))) {
        inv.in_inputs = true;
        inv.owned_in += in.value;
      }
    }
  }
  for (const auto& out : tx.outputs) {
    if (owns(std::string_view(out.address))) {
      inv.in_outputs = true;
      inv.owned_out += out.value;
    }
  }
  return inv;
}

/// Coinbase if the transaction mints; else Spent if the subject signs an
/// input; else Received. Payback marks subject addresses on both sides.
TxRole role_of(const Transaction& tx, const Involvement& inv);

/// `subject_addresses` must be sorted. Throws ContractViolation when the
/// transaction does not mention the subject.
TxRole assign_role(const Transaction& tx, std::span<const std::string> subject_addresses);

/// Builds a canonical-ordered history with roles computed against the sorted
/// address set. Duplicate transactions (same txid) are dropped.
TransactionHistory make_history(std::string subject, std::vector<std::string> addresses,
                                std::vector<const Transaction*> txs);

/// First `max_tx` entries of `history`.
TransactionHistory truncate(TransactionHistory history, std::size_t max_tx);

// ---------------------------------------------------------------------------
// Amount helpers

/// sat / 1e8 * rate(date). A missing rate yields 0.
double usd_value(Satoshi sat, Day day, const RateTable& rates);

/// floor(log10(usd)) clamped to [-3, 6] and shifted to 0..9; nullopt for usd <= 0.
std::optional<int> magnitude_bin(double usd);

/// Block-height gaps between successive transactions of the history.
std::vector<double> interval_samples(const TransactionHistory& history);

struct BalanceTrace {
  std::vector<Satoshi> balance_sat;
  std::vector<double> balance_usd;
  std::size_t negative_count = 0;
};

BalanceTrace balance_trace(const TransactionHistory& history, const RateTable& rates);

// ---------------------------------------------------------------------------
// Summaries

using BasicStats = Eigen::Matrix<double, kNumBasic, 1>;
using ExtraStats = Eigen::Matrix<double, kNumExtra, 1>;

struct SummaryDiagnostics {
  std::uint64_t missing_rate_lookups = 0;
  std::uint64_t negative_balances = 0;
};

/// Single-pass state for one subject. Fixed size: no allocation per
/// transaction. Transactions must arrive in canonical order.
class SubjectAccumulator {
 public:
  void add(const Transaction& tx, const Involvement& inv, TxRole role, const RateTable& rates);

  std::uint64_t transaction_count() const { return n_tx_; }
  FeatureVector features() const;
  SummaryDiagnostics diagnostics() const { return diag_; }

 private:
  enum Dist { kOverall, kSpent, kReceived, kCoinbase, kPayback, kNumDist };

  std::uint64_t n_tx_ = 0;
  std::uint64_t n_spent_ = 0;
  std::uint64_t n_received_ = 0;
  std::uint64_t n_coinbase_ = 0;
  std::uint64_t n_payback_ = 0;
  std::uint64_t spent_inputs_ = 0;
  std::uint64_t spent_outputs_ = 0;
  std::array<std::uint64_t, kNumMagnitudeBins> spent_bins_{};
  std::array<std::uint64_t, kNumMagnitudeBins> received_bins_{};
  std::uint64_t spent_binned_ = 0;
  std::uint64_t received_binned_ = 0;
  Day first_day_ = 0;
  Day last_day_ = 0;
  Satoshi spent_sat_ = 0;
  Satoshi received_sat_ = 0;
  double spent_usd_ = 0;
  double received_usd_ = 0;
  Satoshi balance_sat_ = 0;
  double balance_usd_ = 0;
  std::uint64_t last_height_ = 0;
  MomentAccumulator<double> balance_btc_acc_;
  MomentAccumulator<double> balance_usd_acc_;
  std::array<MomentAccumulator<double>, kNumDist> heights_;
  MomentAccumulator<double> intervals_;
  SummaryDiagnostics diag_;
};

/// 26 basic statistics of a non-empty history.
BasicStats basic_stats(const TransactionHistory& history, const RateTable& rates);

/// 14 extra statistics of a non-empty history.
ExtraStats extra_stats(const TransactionHistory& history, const RateTable& rates);

/// Full 64-dimensional summary. Throws ContractViolation on an empty history.
FeatureVector summarize(const TransactionHistory& history, const RateTable& rates,
                        SummaryDiagnostics* diagnostics = nullptr);

/// Summarizes many histories on `threads` workers; output order matches input.
std::vector<FeatureVector> summarize_all(std::span<const TransactionHistory> histories,
                                         const RateTable& rates, unsigned threads,
                                         SummaryDiagnostics* diagnostics = nullptr);

// ---------------------------------------------------------------------------
// Streaming summarizer

/// Maps an address to the subject it belongs to; an empty view means the
/// address is not tracked. Returned views must outlive the summarizer.
using SubjectResolver = std::function<std::string_view(std::string_view address)>;

/// Consumes a canonically ordered transaction stream and keeps one
/// fixed-size accumulator per subject. Memory is proportional to the number
/// of subjects, never to the number of transactions.
class StreamingSummarizer {
 public:
  StreamingSummarizer(const RateTable& rates, SubjectResolver resolver);

  /// Throws InputError when a subject sees transactions out of canonical order.
  void add(const Transaction& tx);

  std::size_t subject_count() const { return states_.size(); }
  std::uint64_t transactions_seen() const { return seen_; }
  std::uint64_t duplicates_skipped() const { return duplicates_; }

  /// (subject, features) sorted by subject.
  std::vector<std::pair<std::string, FeatureVector>> results() const;
  SummaryDiagnostics diagnostics() const;

  const AllocationCounter& memory() const { return *memory_; }

 private:
  using Key = std::basic_string<char, std::char_traits<char>, CountingAllocator<char>>;
  struct State {
    SubjectAccumulator acc;
    std::uint64_t last_height = 0;
    std::uint64_t last_pos = 0;
    std::array<char, 64> last_txid{};
  };
  using StateMap = std::map<Key, State, std::less<>, CountingAllocator<std::pair<const Key, State>>>;

  const RateTable& rates_;
  SubjectResolver resolver_;
  std::shared_ptr<AllocationCounter> memory_;
  StateMap states_;
  std::uint64_t seen_ = 0;
  std::uint64_t duplicates_ = 0;
};

}  // namespace txhist

#endif  // TXHIST_SUMMARIZE_HPP

#ifndef TXHIST_CORE_HPP
#define TXHIST_CORE_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace txhist {

// Amounts are integer satoshis; BTC and USD are derived views.
using Satoshi = std::int64_t;
inline constexpr Satoshi kSatoshiPerBtc = 100'000'000;

// Days since 1970-01-01 (UTC).
using Day = std::int64_t;

inline constexpr std::string_view kCoinbaseAddress = "COINBASE";

// ---------------------------------------------------------------------------
// Errors

/// Malformed or invalid input data. `line` is 1-based, 0 when not applicable.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Syntactically readable record that violates a domain invariant.
class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

/// Caller broke a precondition or an internal invariant failed.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Categories

enum class Category : std::uint8_t { Exchange, Faucet, Gambling, HYIP, Market, Mixer, Pool };
inline constexpr int kNumCategories = 7;

inline constexpr std::array<Category, kNumCategories> kAllCategories = {
    Category::Exchange, Category::Faucet, Category::Gambling, Category::HYIP,
    Category::Market,   Category::Mixer,  Category::Pool};

std::string_view category_name(Category c);

/// Case-insensitive. Throws InputError listing the valid names.
Category parse_category(std::string_view name);

inline int ordinal(Category c) { return static_cast<int>(c); }

// ---------------------------------------------------------------------------
// Calendar helpers

inline Day day_of(std::int64_t unix_seconds) {
  constexpr std::int64_t kSecondsPerDay = 86'400;
  Day d = unix_seconds / kSecondsPerDay;
  if (unix_seconds % kSecondsPerDay < 0) --d;
  return d;
}

/// Strict YYYY-MM-DD; nullopt when malformed or not a calendar date.
std::optional<Day> parse_iso_date(std::string_view text);
std::string format_iso_date(Day day);

// ---------------------------------------------------------------------------
// Ledger records

struct TxInput {
  std::string address;
  Satoshi value = 0;

  bool is_coinbase() const { return address == kCoinbaseAddress; }
  bool operator==(const TxInput&) const = default;
};

struct TxOutput {
  std::string address;
  Satoshi value = 0;

  bool operator==(const TxOutput&) const = default;
};

struct Transaction {
  std::string txid;
  std::uint64_t block_height = 0;
  std::int64_t timestamp = 0;
  std::uint64_t position_in_block = 0;
  std::vector<TxInput> inputs;
  std::vector<TxOutput> outputs;

  bool is_coinbase() const { return !inputs.empty() && inputs.front().is_coinbase(); }
  Satoshi input_total() const;
  Satoshi output_total() const;
  bool operator==(const Transaction&) const = default;
};

/// Throws ValidationError when a record breaks the ledger invariants.
void validate(const Transaction& tx, std::size_t line = 0);

/// Canonical history order: (block_height, position_in_block, txid).
bool canonical_less(const Transaction& a, const Transaction& b);

enum class RoleKind : std::uint8_t { Coinbase, Spent, Received };

struct TxRole {
  RoleKind kind = RoleKind::Received;
  bool payback = false;
  bool operator==(const TxRole&) const = default;
};

std::string_view role_name(RoleKind kind);

struct HistoryEntry {
  const Transaction* tx = nullptr;
  TxRole role;
};

/// Relevant transactions of one address or entity in canonical order.
/// `addresses` is the sorted member set the roles were computed against.
struct TransactionHistory {
  std::string subject;
  std::vector<std::string> addresses;
  std::vector<HistoryEntry> entries;
  std::optional<Category> category;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  bool owns(std::string_view address) const;
};

// ---------------------------------------------------------------------------
// Moments

template <typename Scalar>
struct Moments {
  Scalar m1 = 0;
  Scalar m2 = 0;
  Scalar m3 = 0;
  Scalar m4 = 0;
  std::size_t sample_count = 0;
};

// ---------------------------------------------------------------------------
// Feature vector layout

inline constexpr int kNumBasic = 26;
inline constexpr int kNumExtra = 14;
inline constexpr int kNumMoment = 24;
inline constexpr int kNumFeatures = kNumBasic + kNumExtra + kNumMoment;

inline constexpr int kBasicOffset = 0;
inline constexpr int kExtraOffset = kNumBasic;
inline constexpr int kMomentOffset = kNumBasic + kNumExtra;

inline constexpr int kNumMagnitudeBins = 10;
inline constexpr int kMinMagnitudeExponent = -3;

namespace feature {
// Basic statistics.
inline constexpr int kTxFrequency = 0;
inline constexpr int kReceivedRatio = 1;
inline constexpr int kCoinbaseRatio = 2;
inline constexpr int kSpentBins = 3;
inline constexpr int kReceivedBins = 13;
inline constexpr int kPaybackRatio = 23;
inline constexpr int kMeanInputs = 24;
inline constexpr int kMeanOutputs = 25;
// Extra statistics.
inline constexpr int kLifetime = 26;
inline constexpr int kBtcSpent = 27;
inline constexpr int kBtcReceived = 28;
inline constexpr int kUsdSpent = 29;
inline constexpr int kUsdReceived = 30;
inline constexpr int kNumTx = 31;
inline constexpr int kNumSpent = 32;
inline constexpr int kNumReceived = 33;
inline constexpr int kNumCoinbase = 34;
inline constexpr int kNumPayback = 35;
inline constexpr int kBalanceBtcMean = 36;
inline constexpr int kBalanceBtcStd = 37;
inline constexpr int kBalanceUsdMean = 38;
inline constexpr int kBalanceUsdStd = 39;
// Moment blocks, four values each.
inline constexpr int kOverallMoments = 40;
inline constexpr int kSpentMoments = 44;
inline constexpr int kReceivedMoments = 48;
inline constexpr int kCoinbaseMoments = 52;
inline constexpr int kPaybackMoments = 56;
inline constexpr int kIntervalMoments = 60;
}  // namespace feature

using FeatureVector = Eigen::Matrix<double, kNumFeatures, 1>;

/// Canonical column names, index-aligned with FeatureVector.
const std::array<std::string, kNumFeatures>& feature_names();

/// Index of a canonical feature name, or -1.
int feature_index(std::string_view name);

enum class FeatureGroup : std::uint8_t { Basic, Extra, Moments };
FeatureGroup feature_group(int index);

// ---------------------------------------------------------------------------
// Daily BTC/USD rates

struct RateLookup {
  double usd_per_btc = 0.0;
  bool found = false;
};

class RateTable {
 public:
  static constexpr Day kMaxLookback = 7;

  RateTable() = default;

  /// Throws InputError on a duplicate date or a non-positive rate.
  void insert(Day day, double usd_per_btc);

  /// Exact date, else the nearest earlier date at most kMaxLookback days back,
  /// else {0, found=false}.
  RateLookup lookup(Day day) const;

  std::size_t size() const { return rates_.size(); }
  bool empty() const { return rates_.empty(); }
  const std::map<Day, double>& entries() const { return rates_; }

 private:
  std::map<Day, double> rates_;
};

}  // namespace txhist

#endif  // TXHIST_CORE_HPP

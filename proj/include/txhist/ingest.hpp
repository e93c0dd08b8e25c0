#ifndef TXHIST_INGEST_HPP
#define TXHIST_INGEST_HPP

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "txhist/core.hpp"

namespace txhist {

/// Address -> category, one category per address.
class LabelSet {
 public:
  /// Re-inserting the same pair is accepted; a conflicting category throws.
  void insert(const std::string& address, Category category, std::size_t line = 0);

  const Category* find(std::string_view address) const;
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const std::map<std::string, Category, std::less<>>& entries() const { return labels_; }

 private:
  std::map<std::string, Category, std::less<>> labels_;
};

struct ParseOptions {
  /// Count and drop invalid records instead of throwing.
  bool skip_invalid = false;
};

struct ParseStats {
  std::size_t records = 0;
  std::size_t skipped = 0;
  std::size_t blank_lines = 0;
};

/// Parse one JSON transaction record and validate it.
/// Throws InputError (malformed) or ValidationError (invariant broken).
Transaction parse_transaction_record(std::string_view line, std::size_t line_number = 0);

/// Canonical single-line encoding; parse_transaction_record inverts it.
std::string format_transaction_record(const Transaction& tx);

/// Streaming form: calls `sink` once per valid record, in file order.
ParseStats for_each_transaction(std::istream& in, const std::function<void(Transaction&&)>& sink,
                                const ParseOptions& options = {});

std::vector<Transaction> parse_transactions(std::istream& in, const ParseOptions& options = {},
                                            ParseStats* stats = nullptr);

void write_transactions(std::ostream& out, const std::vector<Transaction>& txs);

/// CSV with header `date,usd_per_btc`.
RateTable parse_rate_table(std::istream& in);
void write_rate_table(std::ostream& out, const RateTable& rates);

/// CSV with header `address,category`.
LabelSet parse_labels(std::istream& in);
void write_labels(std::ostream& out, const LabelSet& labels);

}  // namespace txhist

#endif  // TXHIST_INGEST_HPP

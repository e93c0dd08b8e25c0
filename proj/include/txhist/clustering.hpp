#ifndef TXHIST_CLUSTERING_HPP
#define TXHIST_CLUSTERING_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "txhist/core.hpp"
#include "txhist/ingest.hpp"

namespace txhist {

using EntityId = std::uint32_t;

/// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n = 0);

  std::size_t add();
  std::size_t find(std::size_t x);
  /// Returns true when two distinct sets were merged.
  bool unite(std::size_t a, std::size_t b);
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

/// Partition of addresses into entities. Ids are dense and ordered by each
/// entity's lexicographically smallest member address.
class EntityMap {
 public:
  EntityMap() = default;
  explicit EntityMap(std::vector<std::vector<std::string>> groups);

  std::optional<EntityId> entity_of(std::string_view address) const;
  /// Sorted member addresses. Throws ContractViolation for an unknown id.
  const std::vector<std::string>& members(EntityId id) const;
  std::size_t entity_count() const { return members_.size(); }
  std::size_t address_count() const { return index_.size(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::vector<std::string>> members_;
  std::unordered_map<std::string, EntityId, Hash, std::equal_to<>> index_;
};

/// Common-spend clustering: all input addresses of a transaction share an
/// entity. Coinbase inputs are ignored. Output-only addresses are included
/// only when labeled, as singletons.
EntityMap build_entities(std::span<const Transaction> txs, const LabelSet* labels = nullptr);

/// Address -> indices of the transactions that mention it, ascending.
class AddressIndex {
 public:
  explicit AddressIndex(std::span<const Transaction> txs);

  std::span<const std::size_t> transactions_of(std::string_view address) const;
  std::span<const Transaction> transactions() const { return txs_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::span<const Transaction> txs_;
  std::unordered_map<std::string, std::vector<std::size_t>, Hash, std::equal_to<>> index_;
};

TransactionHistory address_history(std::string_view address, const AddressIndex& index);

/// Union of the member histories, deduplicated by txid, with roles recomputed
/// against the full member set. Throws ContractViolation for an unknown id.
TransactionHistory entity_history(EntityId id, const EntityMap& map, const AddressIndex& index);

std::string entity_subject(EntityId id);

enum class LabelConflictPolicy { Error, Majority };

/// Category of an entity from its labeled members; nullopt when none is
/// labeled. Error policy throws InputError on disagreement; Majority picks the
/// most frequent label, ties to the lowest ordinal.
std::optional<Category> entity_category(EntityId id, const EntityMap& map, const LabelSet& labels,
                                        LabelConflictPolicy policy);

}  // namespace txhist

#endif  // TXHIST_CLUSTERING_HPP

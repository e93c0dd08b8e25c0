#include "txhist/clustering.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "txhist/summarize.hpp"

namespace txhist {

UnionFind::UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::add() {
  parent_.push_back(parent_.size());
  size_.push_back(1);
  return parent_.size() - 1;
}

std::size_t UnionFind::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  return true;
}

EntityMap::EntityMap(std::vector<std::vector<std::string>> groups) {
  for (auto& g : groups) {
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
  }
  std::erase_if(groups, [](const auto& g) { return g.empty(); });
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  members_ = std::move(groups);
  for (EntityId id = 0; id < members_.size(); ++id) {
    for (const auto& address : members_[id]) {
      if (!index_.emplace(address, id).second) {
        throw ContractViolation("address " + address + " assigned to two entities");
      }
    }
  }
}

std::optional<EntityId> EntityMap::entity_of(std::string_view address) const {
  const auto it = index_.find(address);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::string>& EntityMap::members(EntityId id) const {
  if (id >= members_.size()) throw ContractViolation("unknown entity id " + std::to_string(id));
  return members_[id];
}

EntityMap build_entities(std::span<const Transaction> txs, const LabelSet* labels) {
  std::unordered_map<std::string_view, std::size_t> ids;
  std::vector<std::string_view> names;
  UnionFind uf;
  auto intern = [&](std::string_view address) {
    const auto [it, inserted] = ids.emplace(address, names.size());
    if (inserted) {
      names.push_back(address);
      uf.add();
    }
    return it->second;
  };

  for (const auto& tx : txs) {
    if (tx.is_coinbase()) continue;
    const std::size_t first = intern(tx.inputs.front().address);
    for (std::size_t k = 1; k < tx.inputs.size(); ++k) uf.unite(first, intern(tx.inputs[k].address));
  }
  if (labels) {
    for (const auto& tx : txs) {
      for (const auto& out : tx.outputs) {
        if (labels->find(out.address)) intern(out.address);
      }
    }
  }

  std::unordered_map<std::size_t, std::size_t> group_of_root;
  std::vector<std::vector<std::string>> groups;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto [it, inserted] = group_of_root.emplace(uf.find(i), groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].emplace_back(names[i]);
  }
  return EntityMap(std::move(groups));
}

AddressIndex::AddressIndex(std::span<const Transaction> txs) : txs_(txs) {
  std::vector<std::string_view> seen;
  for (std::size_t i = 0; i < txs.size(); ++i) {
    seen.clear();
    for (const auto& in : txs[i].inputs) {
      if (!in.is_coinbase()) seen.push_back(in.address);
    }
    for (const auto& out : txs[i].outputs) seen.push_back(out.address);
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (std::string_view address : seen) {
      auto it = index_.find(address);
      if (it == index_.end()) it = index_.emplace(std::string(address), std::vector<std::size_t>{}).first;
      it->second.push_back(i);
    }
  }
}

std::span<const std::size_t> AddressIndex::transactions_of(std::string_view address) const {
  const auto it = index_.find(address);
  if (it == index_.end()) return {};
  return it->second;
}

TransactionHistory address_history(std::string_view address, const AddressIndex& index) {
  std::vector<const Transaction*> txs;
  for (std::size_t i : index.transactions_of(address)) txs.push_back(&index.transactions()[i]);
  return make_history(std::string(address), {std::string(address)}, std::move(txs));
}

std::string entity_subject(EntityId id) { return "entity:" + std::to_string(id); }

TransactionHistory entity_history(EntityId id, const EntityMap& map, const AddressIndex& index) {
  const auto& members = map.members(id);
  std::vector<std::size_t> rows;
  for (const auto& address : members) {
    const auto r = index.transactions_of(address);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::vector<const Transaction*> txs;
  txs.reserve(rows.size());
  for (std::size_t i : rows) txs.push_back(&index.transactions()[i]);
  return make_history(entity_subject(id), members, std::move(txs));
}

std::optional<Category> entity_category(EntityId id, const EntityMap& map, const LabelSet& labels,
                                        LabelConflictPolicy policy) {
  std::array<std::size_t, kNumCategories> votes{};
  std::string first_address;
  std::optional<Category> first;
  for (const auto& address : map.members(id)) {
    const Category* c = labels.find(address);
    if (!c) continue;
    ++votes[ordinal(*c)];
    if (!first) {
      first = *c;
      first_address = address;
    } else if (*c != *first && policy == LabelConflictPolicy::Error) {
      throw InputError("entity " + std::to_string(id) + " merges differently labeled addresses " +
                       first_address + " (" + std::string(category_name(*first)) + ") and " +
                       address + " (" + std::string(category_name(*c)) + ")");
    }
  }
  if (!first) return std::nullopt;
  const auto best = std::max_element(votes.begin(), votes.end());  // first max = lowest ordinal
  return kAllCategories[static_cast<std::size_t>(best - votes.begin())];
}

}  // namespace txhist

#include <doctest.h>

#include <set>

#include "generators.hpp"
#include "oracles.hpp"
#include "txhist/clustering.hpp"
#include "txhist/summarize.hpp"

using namespace txhist;

namespace {

constexpr std::int64_t kStart = 1356998400;  // 2013-01-01
const Day kDay0 = day_of(kStart);

struct Ledger {
  std::vector<Transaction> txs;

  // Stable storage: histories keep pointers into `txs`.
  Ledger() { txs.reserve(64); }

  Transaction& add(std::uint64_t height, int day, std::vector<TxInput> in, std::vector<TxOutput> out) {
    Transaction tx;
    tx.txid = gen::txid(txs.size() + 1);
    tx.block_height = height;
    tx.timestamp = kStart + day * 86400 + 3600;
    tx.inputs = std::move(in);
    tx.outputs = std::move(out);
    validate(tx);
    txs.push_back(std::move(tx));
    return txs.back();
  }

  TransactionHistory history(std::vector<std::string> addresses) const {
    std::vector<const Transaction*> mine;
    std::set<std::string> owned(addresses.begin(), addresses.end());
    for (const auto& tx : txs) {
      bool hit = false;
      for (const auto& in : tx.inputs) hit |= owned.count(in.address) > 0;
      for (const auto& out : tx.outputs) hit |= owned.count(out.address) > 0;
      if (hit) mine.push_back(&tx);
    }
    std::sort(addresses.begin(), addresses.end());
    return make_history(addresses.front(), addresses, std::move(mine));
  }
};

const TxInput coinbase{std::string(kCoinbaseAddress), 2'500'000'000};

RateTable flat_rates(double rate, int days = 400) {
  RateTable rates;
  for (int d = -10; d < days; ++d) rates.insert(kDay0 + d, rate);
  return rates;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

TEST_CASE("roles") {
  Ledger l;
  const auto& mint = l.add(1, 0, {coinbase}, {{"S", 2'500'000'000}});
  const auto& fig2 = l.add(2, 0, {{"alice", 200'000'000}, {"alice", 100'000'000}},
                           {{"bob", 250'000'000}, {"alice", 49'500'000}});
  const std::vector<std::string> s = {"S"}, alice = {"alice"}, bob = {"bob"};

  CHECK(assign_role(mint, s) == TxRole{RoleKind::Coinbase, false});
  CHECK(assign_role(fig2, alice) == TxRole{RoleKind::Spent, true});
  CHECK(assign_role(fig2, bob) == TxRole{RoleKind::Received, false});
  CHECK_THROWS_AS(assign_role(fig2, s), ContractViolation);

  // Coinbase to a subject that also appears as an ordinary output twice.
  const auto& pool = l.add(3, 0, {coinbase}, {{"P", 1}, {"P", 2}});
  CHECK(assign_role(pool, std::vector<std::string>{"P"}) == TxRole{RoleKind::Coinbase, false});
}

TEST_CASE("usd_value") {
  RateTable rates;
  rates.insert(kDay0, 100.0);
  rates.insert(kDay0 + 1, 12.0);
  CHECK(usd_value(kSatoshiPerBtc, kDay0, rates) == 100.0);
  CHECK(usd_value(0, kDay0, rates) == 0.0);
  CHECK(usd_value(250'000'000, kDay0 + 1, rates) == 30.0);
  CHECK(usd_value(kSatoshiPerBtc, kDay0 - 1, rates) == 0.0);
  CHECK(usd_value(kSatoshiPerBtc, kDay0 + 8, rates) == 12.0);
}

TEST_CASE("usd_value agrees with integer arithmetic on cent rates") {
  gen::Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t cents = static_cast<std::int64_t>(gen::uniform(rng, 1, 10'000'000));
    const std::int64_t sat = static_cast<std::int64_t>(gen::uniform(rng, 0, 2'100'000'000'000'000ULL));
    RateTable rates;
    rates.insert(0, static_cast<double>(cents) / 100.0);
    // Exact value is sat * cents / 1e10; compare in long double.
    const __int128 num = static_cast<__int128>(sat) * cents;
    const long double exact = static_cast<long double>(num) / 1e10L;
    CHECK(close(usd_value(sat, 0, rates), static_cast<double>(exact)));
  }
}

TEST_CASE("magnitude bins") {
  CHECK(magnitude_bin(250.0) == 5);
  CHECK(magnitude_bin(0.0005) == 0);
  CHECK(magnitude_bin(5'000'000.0) == 9);
  CHECK(magnitude_bin(1e9) == 9);
  CHECK(magnitude_bin(0.001) == 0);
  CHECK(magnitude_bin(1.0) == 3);
  CHECK(magnitude_bin(0.999999) == 2);
  CHECK(magnitude_bin(1000.0) == 6);
  CHECK_FALSE(magnitude_bin(0.0));
  CHECK_FALSE(magnitude_bin(-3.0));
  gen::Rng rng(12);
  for (int i = 0; i < 5000; ++i) {
    const double usd = std::pow(10.0, gen::uniform_real(rng, -5, 8));
    CHECK(magnitude_bin(usd) == oracle::bin_of(usd));
  }
  for (double p = 1e-3; p <= 1e6; p *= 10) CHECK(magnitude_bin(p) == oracle::bin_of(p));
}

TEST_CASE("intervals") {
  Ledger l;
  l.add(5, 0, {{"a", 1}}, {{"b", 1}});
  l.add(5, 0, {{"a", 1}}, {{"c", 1}});
  l.add(9, 0, {{"a", 1}}, {{"d", 1}});
  CHECK(interval_samples(l.history({"a"})) == std::vector<double>{0, 4});
  CHECK(interval_samples(l.history({"b"})).empty());

  Ledger fig;
  for (std::uint64_t h : {193967, 194101, 194157, 200000, 200373, 212118, 212272}) {
    fig.add(h, 0, {{"x", 1}}, {{"y", 1}});
  }
  CHECK(interval_samples(fig.history({"x"})) == std::vector<double>{134, 56, 5843, 373, 11745, 154});
}

TEST_CASE("basic statistics") {
  SUBCASE("one received transaction of 100 USD") {
    Ledger l;
    l.add(1, 0, {{"x", kSatoshiPerBtc}}, {{"S", kSatoshiPerBtc}});
    const BasicStats b = basic_stats(l.history({"S"}), flat_rates(100.0));
    BasicStats want = BasicStats::Zero();
    want(feature::kTxFrequency) = 1;
    want(feature::kReceivedRatio) = 1;
    want(feature::kReceivedBins + 5) = 1;
    CHECK(b == want);
  }
  SUBCASE("two coinbase transactions on consecutive days") {
    Ledger l;
    l.add(1, 0, {coinbase}, {{"S", 2'500'000'000}});
    l.add(150, 1, {coinbase}, {{"S", 2'500'000'000}});
    const BasicStats b = basic_stats(l.history({"S"}), flat_rates(10.0));
    CHECK(b(feature::kCoinbaseRatio) == 1.0);
    CHECK(b(feature::kTxFrequency) == 2.0);
    CHECK(b(feature::kReceivedRatio) == 0.0);
  }
  SUBCASE("spent transactions with two inputs and three outputs") {
    Ledger l;
    for (int i = 0; i < 4; ++i) {
      l.add(static_cast<std::uint64_t>(10 + i), i, {{"S", 5}, {"T", 5}}, {{"a", 1}, {"b", 1}, {"c", 1}});
    }
    const BasicStats b = basic_stats(l.history({"S"}), flat_rates(10.0));
    CHECK(b(feature::kMeanInputs) == 2.0);
    CHECK(b(feature::kMeanOutputs) == 3.0);
  }
  SUBCASE("payback counts per transaction") {
    Ledger l;
    l.add(1, 0, {{"x", 300}}, {{"S", 300}});
    l.add(2, 0, {{"S", 300}}, {{"y", 100}, {"S", 199}});
    l.add(3, 0, {{"S", 199}}, {{"y", 199}});
    l.add(4, 0, {{"x", 1}}, {{"S", 1}});
    const BasicStats b = basic_stats(l.history({"S"}), flat_rates(10.0));
    CHECK(b(feature::kPaybackRatio) == 0.25);
    CHECK(b(feature::kReceivedRatio) == 0.5);
  }
}

TEST_CASE("extra statistics") {
  SUBCASE("single received bitcoin") {
    Ledger l;
    l.add(1, 0, {{"x", kSatoshiPerBtc}}, {{"S", kSatoshiPerBtc}});
    const ExtraStats e = extra_stats(l.history({"S"}), flat_rates(10.0));
    const int o = kExtraOffset;
    CHECK(e(feature::kLifetime - o) == 0);
    CHECK(e(feature::kBtcReceived - o) == 1);
    CHECK(e(feature::kBtcSpent - o) == 0);
    CHECK(e(feature::kNumTx - o) == 1);
    CHECK(e(feature::kNumReceived - o) == 1);
    CHECK(e(feature::kBalanceBtcMean - o) == 1);
    CHECK(e(feature::kBalanceBtcStd - o) == 0);
  }
  SUBCASE("receive two then spend two") {
    Ledger l;
    l.add(1, 0, {{"x", 2 * kSatoshiPerBtc}}, {{"S", 2 * kSatoshiPerBtc}});
    l.add(2, 3, {{"S", 2 * kSatoshiPerBtc}}, {{"y", 2 * kSatoshiPerBtc}});
    const auto h = l.history({"S"});
    const ExtraStats e = extra_stats(h, flat_rates(10.0));
    const int o = kExtraOffset;
    CHECK(balance_trace(h, flat_rates(10.0)).balance_sat == std::vector<Satoshi>{200'000'000, 0});
    CHECK(e(feature::kBalanceBtcMean - o) == 1);
    CHECK(e(feature::kBalanceBtcStd - o) == 1);
    CHECK(e(feature::kLifetime - o) == 3);
    CHECK(e(feature::kBalanceUsdMean - o) == 10);
    CHECK(e(feature::kBalanceUsdStd - o) == 10);
  }
  SUBCASE("mixer-style forward on the same day") {
    Ledger l;
    l.add(1, 0, {{"x", 100 * kSatoshiPerBtc}}, {{"S", 100 * kSatoshiPerBtc}});
    l.add(3, 0, {{"S", 100 * kSatoshiPerBtc}}, {{"y", 100 * kSatoshiPerBtc}});
    const ExtraStats e = extra_stats(l.history({"S"}), flat_rates(10.0));
    const int o = kExtraOffset;
    CHECK(e(feature::kLifetime - o) == 0);
    CHECK(e(feature::kBalanceBtcStd - o) == 50);
    CHECK(e(feature::kBalanceBtcMean - o) == 50);
  }
  SUBCASE("coinbase and payback outputs count as received") {
    Ledger l;
    l.add(1, 0, {coinbase}, {{"S", 2'500'000'000}});
    l.add(2, 1, {{"S", 2'500'000'000}}, {{"y", 2'000'000'000}, {"S", 499'000'000}});
    const ExtraStats e = extra_stats(l.history({"S"}), flat_rates(10.0));
    const int o = kExtraOffset;
    CHECK(e(feature::kBtcReceived - o) == doctest::Approx(29.99));
    CHECK(e(feature::kBtcSpent - o) == 25);
    CHECK(e(feature::kNumCoinbase - o) == 1);
    CHECK(e(feature::kNumPayback - o) == 1);
    CHECK(e(feature::kNumSpent - o) == 1);
  }
  SUBCASE("negative balances are permitted and counted") {
    Ledger l;
    l.add(1, 0, {{"S", 500}}, {{"y", 500}});
    const auto h = l.history({"S"});
    SummaryDiagnostics diag;
    const FeatureVector v = summarize(h, flat_rates(10.0), &diag);
    CHECK(v(feature::kBalanceBtcMean) < 0);
    CHECK(diag.negative_balances == 1);
    CHECK(balance_trace(h, flat_rates(10.0)).negative_count == 1);
  }
}

TEST_CASE("summaries of degenerate histories") {
  Ledger l;
  l.add(200000, 0, {{"x", 5}}, {{"S", 5}});
  l.add(200100, 2, {{"x", 5}}, {{"S", 5}});
  l.add(200300, 4, {{"x", 5}}, {{"S", 5}});
  l.add(300000, 0, {{"x", 5}}, {{"T", 5}});

  const FeatureVector single = summarize(l.history({"T"}), flat_rates(10.0));
  for (int block = 0; block < 6; ++block) {
    const int base = kMomentOffset + 4 * block;
    CHECK(single(base + 1) == 0);
    CHECK(single(base + 2) == 0);
    CHECK(single(base + 3) == 0);
  }
  CHECK(single(feature::kOverallMoments) == 0);

  const FeatureVector received = summarize(l.history({"S"}), flat_rates(10.0));
  CHECK(received.segment<4>(feature::kReceivedMoments) == received.segment<4>(feature::kOverallMoments));
  CHECK(received.segment<4>(feature::kSpentMoments).isZero());
  CHECK(received.segment<4>(feature::kCoinbaseMoments).isZero());
  CHECK(received.segment<4>(feature::kPaybackMoments).isZero());
  CHECK(received(feature::kIntervalMoments) == 150);
  CHECK(received(feature::kOverallMoments) == doctest::Approx(400.0 / 3.0));

  CHECK_THROWS_AS(summarize(TransactionHistory{}, flat_rates(1.0)), ContractViolation);
}

TEST_CASE("make_history sorts canonically and drops duplicate txids") {
  Ledger l;
  l.add(9, 0, {{"a", 1}}, {{"b", 1}});
  l.add(3, 0, {{"a", 1}}, {{"b", 1}});
  Transaction copy = l.txs[0];
  l.txs.push_back(copy);
  const auto h = l.history({"a"});
  REQUIRE(h.size() == 2);
  CHECK(h.entries[0].tx->block_height == 3);
  CHECK(h.entries[1].tx->block_height == 9);
  CHECK(truncate(h, 1).size() == 1);
  CHECK(truncate(h, 1).entries[0].tx->block_height == 3);
  CHECK(truncate(h, 0).empty());
  CHECK(truncate(h, 5).size() == 2);
}

TEST_CASE("summaries agree with the materializing oracle") {
  gen::Rng rng(2024);
  std::size_t compared = 0;
  for (int round = 0; round < 300; ++round) {
    const auto txs = gen::ledger(rng, {.max_tx = 40, .addresses = 12});
    const Day first = day_of(gen::LedgerOptions{}.first_time);
    const auto rates = gen::rates(rng, first - 3, first + 400, 0.3);
    const AddressIndex index(txs);
    for (std::size_t a = 0; a < 12; ++a) {
      const std::string address = gen::address(a);
      const auto h = address_history(address, index);
      if (h.empty()) continue;
      const FeatureVector got = summarize(h, rates);
      const auto want = oracle::summarize(txs, {address}, rates.entries());
      for (int c = 0; c < kNumFeatures; ++c) {
        INFO(feature_names()[static_cast<std::size_t>(c)]);
        CHECK(close(got(c), want[static_cast<std::size_t>(c)]));
      }
      ++compared;
    }
  }
  CHECK(compared > 1000);
}

TEST_CASE("schema invariants on random histories") {
  gen::Rng rng(77);
  for (int round = 0; round < 300; ++round) {
    const auto txs = gen::ledger(rng, {.max_tx = 40, .addresses = 10});
    const Day first = day_of(gen::LedgerOptions{}.first_time);
    const auto rates = gen::rates(rng, first, first + 400, 0.5);
    const AddressIndex index(txs);
    for (std::size_t a = 0; a < 10; ++a) {
      const auto h = address_history(gen::address(a), index);
      if (h.empty()) continue;
      const FeatureVector v = summarize(h, rates);
      CHECK(v.allFinite());
      CHECK(v(feature::kNumCoinbase) + v(feature::kNumSpent) + v(feature::kNumReceived) ==
            v(feature::kNumTx));
      for (int r : {feature::kReceivedRatio, feature::kCoinbaseRatio, feature::kPaybackRatio}) {
        CHECK(v(r) >= 0);
        CHECK(v(r) <= 1);
      }
      for (int c = feature::kNumTx; c <= feature::kNumPayback; ++c) {
        CHECK(v(c) >= 0);
        CHECK(v(c) == std::floor(v(c)));
      }
      for (int base : {feature::kSpentBins, feature::kReceivedBins}) {
        const double sum = v.segment<kNumMagnitudeBins>(base).sum();
        CHECK((std::abs(sum - 1) < 1e-12 || sum == 0));
      }
      const auto trace = balance_trace(h, rates);
      Satoshi prev = 0;
      for (std::size_t k = 0; k < h.size(); ++k) {
        const auto inv = involvement(*h.entries[k].tx, [&](std::string_view s) { return h.owns(s); });
        CHECK(trace.balance_sat[k] == prev + inv.owned_out - inv.owned_in);
        prev = trace.balance_sat[k];
        if (h.entries[k].role.kind == RoleKind::Received) CHECK_FALSE(h.entries[k].role.payback);
      }
    }
  }
}

TEST_CASE("streaming summarizer equals per-history summaries") {
  gen::Rng rng(31);
  for (int round = 0; round < 200; ++round) {
    auto txs = gen::ledger(rng, {.max_tx = 60, .addresses = 15});
    const Day first = day_of(gen::LedgerOptions{}.first_time);
    const auto rates = gen::rates(rng, first, first + 400, 0.3);
    std::sort(txs.begin(), txs.end(), canonical_less);

    // Half the addresses grouped pairwise into two-address subjects.
    std::vector<std::string> subject_of(15);
    for (std::size_t a = 0; a < 15; ++a) subject_of[a] = a < 8 ? gen::address(a & ~1ULL) : gen::address(a);
    auto resolver = [&](std::string_view address) -> std::string_view {
      for (std::size_t a = 0; a < 15; ++a) {
        if (address == gen::address(a)) return subject_of[a];
      }
      return {};
    };
    StreamingSummarizer streaming(rates, resolver);
    for (const auto& tx : txs) streaming.add(tx);
    // Re-adding the last transaction is a duplicate, not an ordering error.
    streaming.add(txs.back());

    const AddressIndex index(txs);
    for (const auto& [subject, v] : streaming.results()) {
      std::vector<std::string> members;
      for (std::size_t a = 0; a < 15; ++a) {
        if (subject_of[a] == subject) members.push_back(gen::address(a));
      }
      std::vector<const Transaction*> mine;
      for (const auto& m : members) {
        for (std::size_t i : index.transactions_of(m)) mine.push_back(&txs[i]);
      }
      const auto h = make_history(subject, members, mine);
      const FeatureVector want = summarize(h, rates);
      for (int c = 0; c < kNumFeatures; ++c) CHECK(close(v(c), want(c)));
    }
    CHECK(streaming.transactions_seen() == txs.size() + 1);
  }
}

TEST_CASE("streaming summarizer rejects out-of-order input") {
  Ledger l;
  l.add(5, 0, {{"a", 1}}, {{"b", 1}});
  l.add(4, 0, {{"a", 1}}, {{"b", 1}});
  const RateTable rates = flat_rates(1.0);
  StreamingSummarizer s(rates, [](std::string_view a) { return a == "a" ? std::string_view("a") : std::string_view{}; });
  s.add(l.txs[0]);
  CHECK_THROWS_AS(s.add(l.txs[1]), InputError);
}

TEST_CASE("summarize_all is independent of the thread count") {
  gen::Rng rng(5);
  const auto txs = gen::ledger(rng, {.max_tx = 200, .addresses = 20});
  const Day first = day_of(gen::LedgerOptions{}.first_time);
  const auto rates = gen::rates(rng, first, first + 2000, 0.2);
  const AddressIndex index(txs);
  std::vector<TransactionHistory> histories;
  for (std::size_t a = 0; a < 20; ++a) {
    auto h = address_history(gen::address(a), index);
    if (!h.empty()) histories.push_back(std::move(h));
  }
  SummaryDiagnostics d1, d8;
  const auto one = summarize_all(histories, rates, 1, &d1);
  const auto eight = summarize_all(histories, rates, 8, &d8);
  REQUIRE(one.size() == histories.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i] == eight[i]);
    CHECK(one[i] == summarize(histories[i], rates));
  }
  CHECK(d1.missing_rate_lookups == d8.missing_rate_lookups);
}

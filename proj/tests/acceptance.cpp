// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "generators.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "txhist/cli/commands.hpp"
#include "txhist/clustering.hpp"
#include "txhist/learn/metrics.hpp"
#include "txhist/learn/preprocess.hpp"
#include "txhist/moments.hpp"
#include "txhist/summarize.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool condition, const std::string& message) {
  if (!condition) throw Failure(message);
}

bool close(double a, double b, double tol = 1e-9) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = txhist::cli::run(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

fs::path scratch() {
  static const fs::path dir = fs::temp_directory_path() / ("txhist-acceptance-" + std::to_string(::getpid()));
  return dir;
}

// ---------------------------------------------------------------------------

void compare_moments(const txhist::Moments<double>& got, const oracle::Moments& want,
                     const std::string& what) {
  expect(close(got.m1, want.m1) && close(got.m2, want.m2) && close(got.m3, want.m3) &&
             close(got.m4, want.m4),
         what + ": library (" + num(got.m1) + ", " + num(got.m2) + ", " + num(got.m3) + ", " +
             num(got.m4) + ") vs oracle (" + num(want.m1) + ", " + num(want.m2) + ", " +
             num(want.m3) + ", " + num(want.m4) + ")");
}

std::string moment_oracle_suite() {
  const auto start = std::chrono::steady_clock::now();
  gen::Rng rng(101);
  constexpr int kSamples = 1500;
  int pearson_checked = 0;
  for (int i = 0; i < kSamples; ++i) {
    const std::vector<double> x = gen::sample(rng, 200, 1e7);
    const auto raw = txhist::raw_moments(x);
    const auto shifted = txhist::min_shifted_moments(x);
    compare_moments(raw, oracle::raw_moments(x), "raw_moments");
    compare_moments(shifted, oracle::min_shifted_moments(x), "min_shifted_moments");
    txhist::MomentAccumulator<double> acc;
    for (double v : x) acc.add(v);
    compare_moments(acc.raw(), oracle::raw_moments(x), "streaming raw");
    compare_moments(acc.min_shifted(), oracle::min_shifted_moments(x), "streaming min-shifted");

    // Degenerate rules.
    if (x.empty()) {
      expect(raw.m1 == 0 && raw.m2 == 0 && raw.m3 == 0 && raw.m4 == 0, "empty sample not all zero");
      continue;
    }
    if (raw.m2 == 0 || x.size() == 1) expect(raw.m3 == 0 && raw.m4 == 0, "degenerate m3/m4 not zero");
    if (x.size() == 1) expect(raw.m1 == x[0] && raw.m2 == 0 && shifted.m1 == 0, "single sample");

    // Shift law with an integer offset.
    const double c = std::floor(gen::uniform_real(rng, -1e6, 1e6));
    std::vector<double> moved(x);
    for (auto& v : moved) v += c;
    const auto m = txhist::raw_moments(moved);
    const auto ms = txhist::min_shifted_moments(moved);
    expect(close(m.m1, raw.m1 + c) && close(m.m2, raw.m2, 1e-8) && close(m.m3, raw.m3, 1e-7) &&
               close(m.m4, raw.m4, 1e-7),
           "shift law");
    expect(close(ms.m1, shifted.m1, 1e-8), "min-shifted m1 not shift invariant");

    // Scale law.
    const double s = gen::uniform_real(rng, 0.1, 10);
    std::vector<double> scaled(x);
    for (auto& v : scaled) v *= s;
    const auto k = txhist::raw_moments(scaled);
    const auto ks = txhist::min_shifted_moments(scaled);
    expect(close(k.m2, s * s * raw.m2) && close(k.m3, raw.m3, 1e-7) && close(k.m4, raw.m4, 1e-7) &&
               close(ks.m1, s * shifted.m1),
           "scale law");

    if (raw.m2 > 0) {
      ++pearson_checked;
      expect(raw.m4 >= raw.m3 * raw.m3 + 1 - 1e-9, "Pearson inequality m4 >= m3^2 + 1");
    }
  }
  const auto single = txhist::raw_moments(std::vector<double>{});
  expect(single.sample_count == 0, "empty sample count");
  const double elapsed = seconds_since(start);
  expect(elapsed < 10, "runtime " + num(elapsed) + " s exceeds 10 s");
  return std::to_string(kSamples) + " samples, Pearson checked on " + std::to_string(pearson_checked) +
         ", " + num(elapsed) + " s";
}

std::string worked_heights() {
  const std::vector<std::uint64_t> heights = {193967, 194101, 194157, 200000, 200373, 212118, 212272};
  std::vector<txhist::Transaction> txs;
  for (std::size_t i = 0; i < heights.size(); ++i) {
    txhist::Transaction tx;
    tx.txid = gen::txid(i);
    tx.block_height = heights[i];
    tx.timestamp = 1344000000 + static_cast<std::int64_t>(i) * 86400;
    tx.inputs = {{"sender", 200000}};
    tx.outputs = {{"subject", 100000}};
    txs.push_back(tx);
  }
  std::vector<const txhist::Transaction*> ptrs;
  for (const auto& tx : txs) ptrs.push_back(&tx);
  const auto history = txhist::make_history("subject", {"subject"}, ptrs);
  const auto gaps = txhist::interval_samples(history);
  expect(gaps == std::vector<double>{134, 56, 5843, 373, 11745, 154}, "interval samples differ");

  std::vector<double> h(heights.begin(), heights.end());
  const double mean = oracle::raw_moments(h).m1;
  const auto features = txhist::summarize(history, txhist::RateTable{});
  const double m1 = features[txhist::feature::kOverallMoments];
  expect(close(m1, mean - 193967, 1e-12), "m1' = " + num(m1) + ", oracle " + num(mean - 193967));
  expect(close(m1, 49219.0 / 7, 1e-12), "m1' is not 49219/7");
  expect(close(features[txhist::feature::kIntervalMoments], (212272.0 - 193967.0) / 6, 1e-12),
         "interval mean");
  return "intervals [134, 56, 5843, 373, 11745, 154], m1' = " + num(m1) + " = 49219/7";
}

std::string clustering_oracle() {
  const auto start = std::chrono::steady_clock::now();
  gen::Rng rng(303);
  constexpr int kInstances = 2000;
  std::size_t merged = 0;
  for (int i = 0; i < kInstances; ++i) {
    gen::LedgerOptions options;
    options.max_tx = 50;
    options.addresses = gen::uniform(rng, 1, 20);
    const auto txs = gen::ledger(rng, options);
    txhist::LabelSet labels;
    std::set<std::string> labeled;
    for (std::size_t a = 0; a < options.addresses; ++a) {
      if (gen::chance(rng, 0.3)) {
        labels.insert(gen::address(a), txhist::Category::Exchange);
        labeled.insert(gen::address(a));
      }
    }
    const auto map = txhist::build_entities(txs, &labels);
    const auto expected = oracle::cluster(txs, labeled);
    expect(map.address_count() == expected.size(), "address count differs");
    std::set<std::size_t> ids;
    for (const auto& [address, id] : expected) {
      const auto got = map.entity_of(address);
      expect(got && *got == id, "entity of " + address + " differs in instance " + std::to_string(i));
      ids.insert(id);
    }
    expect(map.entity_count() == ids.size(), "entity count differs");
    merged += expected.size() - ids.size();
  }
  const double elapsed = seconds_since(start);
  expect(elapsed < 30, "runtime " + num(elapsed) + " s exceeds 30 s");
  return std::to_string(kInstances) + " instances, " + std::to_string(merged) + " merges, " +
         num(elapsed) + " s";
}

void check_schema(const txhist::FeatureVector& v, const std::string& subject) {
  namespace f = txhist::feature;
  expect(v.size() == 64 && v.allFinite(), subject + ": non-finite feature");
  expect(v[f::kNumCoinbase] + v[f::kNumSpent] + v[f::kNumReceived] == v[f::kNumTx],
         subject + ": role counts do not partition n_tx");
  for (int side : {f::kSpentBins, f::kReceivedBins}) {
    const double sum = v.segment<txhist::kNumMagnitudeBins>(side).sum();
    expect(sum == 0 || std::abs(sum - 1) < 1e-12, subject + ": magnitude bins sum to " + num(sum));
  }
}

std::string feature_schema() {
  std::size_t vectors = 0;
  synthetic::Options options;
  options.per_category = 10;
  const auto world = synthetic::make_world(options);
  for (auto scheme : {txhist::cli::Scheme::Address, txhist::cli::Scheme::Entity}) {
    txhist::cli::RunConfig config;
    config.scheme = scheme;
    const auto ex = txhist::cli::extract_features(world.txs, world.rates, world.labels, config);
    for (Eigen::Index r = 0; r < ex.data.rows(); ++r) {
      check_schema(ex.data.features.row(r).transpose(), ex.data.subjects[static_cast<std::size_t>(r)]);
      ++vectors;
    }
  }
  gen::Rng rng(404);
  for (int i = 0; i < 300; ++i) {
    const auto txs = gen::ledger(rng);
    const auto rates = gen::rates(rng, txhist::day_of(1356998400) - 3, txhist::day_of(1356998400) + 400);
    const txhist::AddressIndex index(txs);
    for (std::size_t a = 0; a < 20; ++a) {
      const auto h = txhist::address_history(gen::address(a), index);
      if (h.empty()) continue;
      check_schema(txhist::summarize(h, rates), h.subject);
      ++vectors;
    }
  }

  const fs::path fixture = fs::path(TXHIST_TEST_DATA) / "fixtures" / "golden";
  const fs::path out = scratch() / "golden";
  expect(cli({"extract", "--tx", (fixture / "tx.jsonl").string(), "--rates",
              (fixture / "rates.csv").string(), "--labels", (fixture / "labels.csv").string(),
              "--out-dir", out.string()}) == 0,
         "extract failed on the golden fixture");
  const std::string expected = slurp(fs::path(TXHIST_TEST_DATA) / "golden" / "features.csv");
  expect(!expected.empty() && slurp(out / "features.csv") == expected, "golden CSV differs");
  return std::to_string(vectors) + " vectors checked, golden CSV byte-identical";
}

std::string weight_identity() {
  gen::Rng rng(505);
  constexpr int kVectors = 500;
  for (int i = 0; i < kVectors; ++i) {
    const auto labels = gen::labels(rng, gen::uniform(rng, 1, 1000), gen::uniform(rng, 1, 7));
    const auto fractions = txhist::learn::sample_weight_fractions(labels);
    const auto expected = oracle::class_weights(labels);
    // Sum over rows of num/den as an exact fraction.
    __int128 num = 0, den = 1;
    std::array<std::int64_t, 7> counts{};
    for (auto c : labels) ++counts[static_cast<std::size_t>(txhist::ordinal(c))];
    for (std::size_t c = 0; c < 7; ++c) {
      expect(fractions[c].numerator == expected[c].num && fractions[c].denominator == expected[c].den,
             "weight fraction differs from the oracle");
      if (!counts[c]) continue;
      num = num * fractions[c].denominator + den * counts[c] * fractions[c].numerator;
      den *= fractions[c].denominator;
      __int128 a = num, b = den;
      while (b) {
        const __int128 t = a % b;
        a = b;
        b = t;
      }
      num /= a;
      den /= a;
    }
    expect(den == 1 && num == static_cast<__int128>(labels.size()), "sum of weights is not N");
    const double total = txhist::learn::sample_weights(labels).sum();
    expect(close(total, static_cast<double>(labels.size()), 1e-12), "floating weights do not sum to N");
  }
  return std::to_string(kVectors) + " label vectors, sum w_i = N exactly";
}

std::string metrics_checks() {
  using txhist::Category;
  gen::Rng rng(606);
  constexpr int kPairs = 2000;
  for (int i = 0; i < kPairs; ++i) {
    const std::size_t n = gen::uniform(rng, 1, 300);
    const std::size_t classes = gen::uniform(rng, 1, 7);
    const auto truth = gen::labels(rng, n, classes);
    auto pred = gen::labels(rng, n, classes);
    for (std::size_t k = 0; k < n; ++k) {
      if (gen::chance(rng, 0.5)) pred[k] = truth[k];
    }
    const auto e = txhist::learn::evaluate(pred, truth);
    std::size_t correct = 0;
    std::array<std::int64_t, 7> counts{};
    for (std::size_t k = 0; k < n; ++k) {
      correct += pred[k] == truth[k];
      ++counts[static_cast<std::size_t>(txhist::ordinal(truth[k]))];
    }
    expect(close(e.micro_f1, static_cast<double>(correct) / static_cast<double>(n), 1e-15),
           "micro-F1 differs from accuracy");
    const auto norm = txhist::learn::row_normalized(e.confusion);
    for (int r = 0; r < 7; ++r) {
      expect(e.confusion.row(r).sum() == counts[static_cast<std::size_t>(r)], "raw row sum");
      if (counts[static_cast<std::size_t>(r)]) {
        expect(std::abs(norm.row(r).sum() - 1) <= 1e-9, "normalized row sum");
      }
    }
  }
  const std::vector<Category> truths = {Category::Exchange, Category::Exchange, Category::Faucet,
                                        Category::Faucet};
  const std::vector<Category> preds = {Category::Exchange, Category::Faucet, Category::Faucet,
                                       Category::Faucet};
  const auto e = txhist::learn::evaluate(preds, truths);
  expect(e.micro_f1 == 0.75, "hand example micro-F1");
  expect(close(e.per_class[0].f1, 2.0 / 3, 1e-15) && close(e.per_class[1].f1, 0.8, 1e-15),
         "hand example per-class F1");
  expect(close(e.macro_f1, (2.0 / 3 + 0.8) / 2, 1e-15), "hand example macro-F1");
  expect(e.confusion(0, 0) == 1 && e.confusion(0, 1) == 1 && e.confusion(1, 0) == 0 &&
             e.confusion(1, 1) == 2,
         "hand example confusion");
  return std::to_string(kPairs) + " pairs; hand example micro 0.75, macro " + num(e.macro_f1);
}

// ---------------------------------------------------------------------------
// Synthetic end-to-end (criteria 7-9 share the world and runs).

struct CvRun {
  Json report;
  std::string report_bytes, confusion_bytes, importance_bytes;
};

fs::path world_dir() { return scratch() / "world"; }

CvRun run_cv(const std::string& model, const std::string& features, unsigned threads,
             const std::string& tag) {
  const fs::path dir = world_dir();
  const fs::path out = scratch() / tag;
  const int code = cli({"cv", "--tx", (dir / "tx.jsonl").string(), "--rates", (dir / "rates.csv").string(),
                        "--labels", (dir / "labels.csv").string(), "--model", model, "--features",
                        features, "--k", "10", "--seed", "42", "--threads", std::to_string(threads),
                        "--out-dir", out.string()});
  expect(code == 0, "cv " + model + " exited with " + std::to_string(code));
  CvRun run;
  run.report_bytes = slurp(out / "report.json");
  run.confusion_bytes = slurp(out / "confusion.csv");
  run.importance_bytes = slurp(out / "importance.csv");
  run.report = Json::parse(run.report_bytes);
  return run;
}

std::map<std::string, CvRun> runs;

const CvRun& cached(const std::string& model, const std::string& features) {
  const std::string key = model + "/" + features;
  if (!runs.count(key)) runs.emplace(key, run_cv(model, features, 1, key));
  return runs.at(key);
}

std::string synthetic_end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  synthetic::write_world(synthetic::make_world({}), world_dir());
  std::string detail;
  for (const std::string model : {"forest", "gbt"}) {
    const CvRun& run = cached(model, "all");
    const double macro = run.report["macro_f1_mean"].get<double>();
    expect(macro >= 0.90, model + " macro-F1 " + num(macro) + " < 0.90");
    bool moment = false, extra = false;
    const auto& importance = run.report["importance"];
    for (std::size_t r = 0; r < 10 && r < importance.size(); ++r) {
      const auto group = importance[r]["group"].get<std::string>();
      moment |= group == "moments";
      extra |= group == "extra";
    }
    expect(moment && extra, model + " top-10 importance lacks a moment or extra feature");
    detail += model + " macro-F1 " + num(macro) + " micro-F1 " +
              num(run.report["micro_f1_mean"].get<double>()) + "; ";
  }
  const double elapsed = seconds_since(start);
  expect(elapsed < 120, "runtime " + num(elapsed) + " s exceeds 2 min");
  return detail + num(elapsed) + " s";
}

std::string ablation() {
  std::string detail;
  for (const std::string model : {"forest", "gbt"}) {
    const double all = cached(model, "all").report["macro_f1_mean"].get<double>();
    const double basic = cached(model, "basic").report["macro_f1_mean"].get<double>();
    expect(cached(model, "basic").report["features"] == "basic", "basic report lacks its mask");
    expect(all >= basic - 0.01, model + ": all " + num(all) + " < basic " + num(basic) + " - 0.01");
    detail += model + " all " + num(all) + " vs basic " + num(basic) + "; ";
  }
  return detail;
}

std::string determinism() {
  const CvRun& one = cached("gbt", "all");
  const CvRun eight = run_cv("gbt", "all", 8, "gbt-threads8");
  expect(one.report_bytes == eight.report_bytes, "report.json differs between 1 and 8 threads");
  expect(one.confusion_bytes == eight.confusion_bytes, "confusion.csv differs between 1 and 8 threads");
  expect(one.importance_bytes == eight.importance_bytes, "importance.csv differs between 1 and 8 threads");
  const CvRun again = run_cv("gbt", "all", 8, "gbt-threads8-again");
  expect(again.report["config_hash"] == eight.report["config_hash"] && again.report_bytes == eight.report_bytes,
         "consecutive runs differ");

  const fs::path dir = world_dir();
  for (const char* threads : {"1", "8"}) {
    expect(cli({"extract", "--tx", (dir / "tx.jsonl").string(), "--rates", (dir / "rates.csv").string(),
                "--labels", (dir / "labels.csv").string(), "--threads", threads, "--out-dir",
                (scratch() / ("extract" + std::string(threads))).string()}) == 0,
           "extract failed");
  }
  expect(slurp(scratch() / "extract1" / "features.csv") == slurp(scratch() / "extract8" / "features.csv"),
         "features.csv differs between 1 and 8 threads");
  return "report, confusion, importance and features byte-identical; hash " +
         one.report["config_hash"].get<std::string>();
}

// ---------------------------------------------------------------------------

/// Streams `count` transactions over `subjects` addresses into a summarizer.
txhist::StreamingSummarizer& stream(txhist::StreamingSummarizer& summarizer,
                                    const std::vector<std::string>& addresses, std::size_t count,
                                    std::uint64_t seed) {
  gen::Rng rng(seed);
  txhist::Transaction tx;
  for (std::size_t i = 0; i < count; ++i) {
    tx.txid = gen::txid(seed * 0x1000000 + i);
    tx.block_height = 200000 + i / 8;
    tx.position_in_block = i % 8;
    tx.timestamp = 1356998400 + static_cast<std::int64_t>(i / 8) * 600;
    tx.inputs.clear();
    tx.outputs.clear();
    if (i % 50 == 0) {
      tx.inputs.push_back({std::string(txhist::kCoinbaseAddress), 0});
    } else {
      const std::size_t k = gen::uniform(rng, 1, 2);
      for (std::size_t j = 0; j < k; ++j) {
        tx.inputs.push_back({addresses[gen::uniform(rng, 0, addresses.size() - 1)], 150'000'000});
      }
    }
    const std::size_t m = gen::uniform(rng, 1, 3);
    for (std::size_t j = 0; j < m; ++j) {
      tx.outputs.push_back({addresses[gen::uniform(rng, 0, addresses.size() - 1)], 100'000'000});
    }
    summarizer.add(tx);
  }
  return summarizer;
}

std::string throughput() {
  constexpr std::size_t kSubjects = 10'000;
  std::vector<std::string> addresses;
  for (std::size_t i = 0; i < kSubjects; ++i) addresses.push_back("1addr" + std::to_string(100000 + i));
  std::unordered_set<std::string> tracked(addresses.begin(), addresses.end());
  auto resolver = [&](std::string_view a) -> std::string_view {
    const auto it = tracked.find(std::string(a));
    return it == tracked.end() ? std::string_view{} : std::string_view(*it);
  };
  txhist::RateTable rates;
  for (txhist::Day d = txhist::day_of(1356998400) - 1; d < txhist::day_of(1356998400) + 600; ++d) {
    rates.insert(d, 100.0 + static_cast<double>(d % 50));
  }

  txhist::StreamingSummarizer small(rates, resolver);
  stream(small, addresses, 100'000, 1);
  const auto start = std::chrono::steady_clock::now();
  txhist::StreamingSummarizer large(rates, resolver);
  stream(large, addresses, 1'000'000, 2);
  const double elapsed = seconds_since(start);

  expect(large.transactions_seen() == 1'000'000, "not every transaction was consumed");
  expect(small.subject_count() == kSubjects && large.subject_count() == kSubjects,
         "subjects not all seen");
  const auto results = large.results();
  for (const auto& [subject, v] : results) check_schema(v, subject);
  const double per_subject = static_cast<double>(large.memory().peak_bytes) / kSubjects;
  expect(large.memory().peak_bytes == small.memory().peak_bytes,
         "peak memory grew with transaction count: " + std::to_string(small.memory().peak_bytes) +
             " -> " + std::to_string(large.memory().peak_bytes));
  expect(per_subject < 4096, "peak bytes per subject " + num(per_subject));
  return "1e6 transactions in " + num(elapsed) + " s, peak " +
         std::to_string(large.memory().peak_bytes) + " bytes (" + num(per_subject) +
         " per subject, same as for 1e5 transactions)";
}

}  // namespace

int main() {
  fs::remove_all(scratch());
  fs::create_directories(scratch());
  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"moment oracle suite", moment_oracle_suite},
      {"worked height example", worked_heights},
      {"clustering oracle", clustering_oracle},
      {"feature schema", feature_schema},
      {"class weight identity", weight_identity},
      {"metrics", metrics_checks},
      {"synthetic end-to-end", synthetic_end_to_end},
      {"ablation monotonicity", ablation},
      {"determinism and concurrency", determinism},
      {"throughput and memory", throughput},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [name, body] = criteria[i];
    std::string line;
    try {
      line = "[PASS] " + std::to_string(i + 1) + ". " + name + ": " + body();
    } catch (const std::exception& e) {
      ++failed;
      line = "[FAIL] " + std::to_string(i + 1) + ". " + name + ": " + e.what();
    }
    std::cout << line << std::endl;
  }
  fs::remove_all(scratch());
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " acceptance criteria passed" << std::endl;
  return failed ? 1 : 0;
}

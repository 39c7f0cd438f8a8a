// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance --only 8   run one criterion (the ctest entries use this)
//
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <unistd.h>

#include "cogbid/auction.hpp"
#include "cogbid/env.hpp"
#include "cogbid/learning.hpp"
#include "cogbid/runner.hpp"
#include "cogbid/scenarios.hpp"
#include "cogbid/sim.hpp"
#include "cogbid/strategies.hpp"
#include "oracles.hpp"

using namespace cogbid;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Paired comparisons over seeds

constexpr int kSeeds = 20;

/// One-sided exact sign test: P(X >= wins) for X ~ Bin(n, 1/2).
double sign_test_p(int wins, int n) {
  double p = 0.0;
  for (int k = wins; k <= n; ++k) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  }
  return p;
}

/// Per-seed summaries of a built-in scenario at its default horizon, cached.
const std::vector<sim::SummaryStats>& summaries(const std::string& name) {
  static std::map<std::string, std::vector<sim::SummaryStats>> cache;
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  auto base = sim::select_scenarios(name).front();
  std::vector<sim::SummaryStats> out;
  for (int s = 1; s <= kSeeds; ++s) {
    base.seed = static_cast<std::uint64_t>(s);
    out.push_back(sim::run_scenario(base).summary);
  }
  return cache.emplace(name, std::move(out)).first->second;
}

using Metric = std::function<double(const sim::SuSummary&)>;
const Metric kCost = [](const sim::SuSummary& s) { return s.avg_cost; };
const Metric kLoss = [](const sim::SuSummary& s) { return s.loss_rate_pct; };

struct Comparison {
  bool holds = false;
  std::string text;
};

/// Claim: scale * metric(hi) > metric(lo) on the seed mean and by a sign test at 5%.
Comparison greater(const std::string& hi, std::size_t hi_su, const std::string& lo, std::size_t lo_su,
                   const Metric& metric, double scale = 1.0) {
  const auto& a = summaries(hi);
  const auto& b = summaries(lo);
  double ma = 0.0, mb = 0.0;
  int wins = 0, untied = 0;
  for (int s = 0; s < kSeeds; ++s) {
    const double x = scale * metric(a[s].sus[hi_su]), y = metric(b[s].sus[lo_su]);
    ma += x / kSeeds;
    mb += y / kSeeds;
    if (x != y) ++untied;
    if (x > y) ++wins;
  }
  const double p = untied == 0 ? 1.0 : sign_test_p(wins, untied);
  const bool holds = ma > mb && p <= 0.05;
  const std::string lhs =
      scale == 1.0 ? fmt::format("{}[{}]", hi, hi_su + 1) : fmt::format("{}*{}[{}]", scale, hi, hi_su + 1);
  return {holds, fmt::format("{} {:.4f} > {}[{}] {:.4f} ({}/{} seeds, p={:.4f}){}", lhs, ma, lo, lo_su + 1, mb, wins,
                             untied, p, holds ? "" : " FAILS")};
}

Verdict all_of(const std::vector<Comparison>& parts, Clock::time_point t0) {
  Verdict v{true, ""};
  for (const auto& c : parts) {
    v.pass = v.pass && c.holds;
    v.detail += "\n      " + c.text;
  }
  v.detail = fmt::format("{} seeds, {:.1f} s", kSeeds, seconds_since(t0)) + v.detail;
  return v;
}

// ---------------------------------------------------------------------------
// Criteria

Verdict assignment_exactness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto in = oracle::random_instance(rng, 8, 6, 8);
    const auto b = in.matrix();
    const double brute = auction::welfare_of(b, auction::brute_force_assignment(b));
    const double solved = auction::welfare_of(b, auction::solve_assignment(b));
    worst = std::max({worst, std::abs(solved - brute), std::abs(brute - oracle::best_welfare(in))});
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 10.0,
          fmt::format("1000 instances, max |solver - enumeration| = {:.1e}, {:.2f} s", worst, secs)};
}

Verdict second_price() {
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
    auction::BidMatrix b(m, 1);
    for (std::size_t i = 0; i < m; ++i) b(i, 0) = u(rng);
    const auto out = auction::run_auction(b);
    std::vector<double> sorted;
    for (std::size_t i = 0; i < m; ++i) sorted.push_back(b(i, 0));
    std::sort(sorted.rbegin(), sorted.rend());
    const auto winner = std::find(out.allocation.channel_of.begin(), out.allocation.channel_of.end(), 0) -
                        out.allocation.channel_of.begin();
    if (b(static_cast<std::size_t>(winner), 0) != sorted[0] || -out.taxes[winner] != sorted[1]) ++bad;
  }
  return {bad == 0, fmt::format("1000 single-channel instances, {} mismatches", bad)};
}

Verdict vcg_properties() {
  auto c = sim::select_scenarios("two_su_s4").front();
  c.horizon = 10000;
  const auto run = sim::run_scenario(c);
  int bad = 0, auctions = 0;
  for (const auto& rec : run.records) {
    ++auctions;
    for (const auto& s : rec.sus) {
      if (s.tax > 0.0) ++bad;
      if (s.channel == env::kNoChannel) {
        if (s.tax != 0.0) ++bad;
      } else if (-s.tax > s.bids[static_cast<std::size_t>(s.channel)]) {
        ++bad;
      }
    }
  }
  return {bad == 0, fmt::format("{} auctions in two_su_s4, {} violations", auctions, bad)};
}

Verdict truthfulness() {
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  int bad = 0, checks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto in = oracle::random_instance(rng, 6, 4, 5);
    for (auto& r : in.bids) {
      for (auto& x : r) x = u(rng);
    }
    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, static_cast<std::size_t>(in.m) - 1)(rng);
    const auto truthful = in.matrix();
    const auto utility = [&](const auction::BidMatrix& b) {
      const auto out = auction::run_auction(b);
      const int ch = out.allocation.channel_of[i];
      return (ch == auction::kUnassigned ? 0.0 : auction::effective_bid(truthful, i, static_cast<std::size_t>(ch))) +
             out.taxes[i];
    };
    const double honest = utility(truthful);
    for (int d = 0; d < 50; ++d) {
      auto lie = truthful;
      for (int j = 0; j < in.n; ++j) lie(i, static_cast<std::size_t>(j)) = u(rng) * 1.5;
      ++checks;
      if (utility(lie) > honest) ++bad;
    }
  }
  return {bad == 0, fmt::format("{} deviations, {} profitable", checks, bad)};
}

Verdict kernel_fidelity() {
  const auto t0 = Clock::now();
  env::ChannelModel ch;
  ch.p_nf = 0.6;
  ch.p_fn = 0.3;
  ch.snr_db = {15.0, 22.0};
  ch.entry_dist = {0.7, 0.3};
  ch.cond_trans = {{0.8, 0.2}, {0.35, 0.65}};
  env::SuEnvironment m;
  m.channel_matrices = {env::channel_transition_matrix(ch)};
  m.rates = env::RateTable::from_packets_per_slot(std::vector<int>{1, 2}, 0.01);
  m.traffic = env::TrafficModel::make(120.0, 0.01);
  m.capacity = 2;
  const env::StateSpace space(2, 2, 1);

  double worst_sum = 0.0;
  for (std::size_t l = 0; l < 3; ++l) {
    const auto row = m.channel_matrices[0].row(l);
    double t = 0.0;
    for (double p : row) t += p;
    worst_sum = std::max(worst_sum, std::abs(t - 1.0));
    for (int v = 0; v <= 2; ++v) {
      const auto k = env::buffer_kernel({v, 2}, static_cast<int>(l), m.rates, m.traffic);
      double s = 0.0;
      for (double p : k) s += p;
      worst_sum = std::max(worst_sum, std::abs(s - 1.0));
    }
  }

  // Empirical (s, z) -> s' frequencies from the samplers.
  Rng chan = make_stream(7, 1), traffic = make_stream(7, 2), policy = make_stream(7, 3);
  std::vector<std::vector<double>> counts(space.size() * 2, std::vector<double>(space.size(), 0.0));
  env::SUState s{{0, 2}, {env::ChannelState{0}}};
  const int slots = 100000;
  for (int t = 0; t < slots; ++t) {
    const bool assign = s.channels[0].available() && uniform01(policy) < 0.5;
    const int level = assign ? s.channels[0].level : 0;
    const int arrivals = env::sample_arrivals(m.traffic, traffic);
    env::SUState next{env::buffer_next(s.buffer, level, m.rates, m.slot_len(), arrivals),
                      {env::step_channel(s.channels[0], m.channel_matrices[0], chan)}};
    counts[space.index(s) * 2 + (assign ? 1 : 0)][space.index(next)] += 1.0;
    s = next;
  }
  // Visit-weighted total variation between the empirical and model rows.
  double tv = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    for (int a = 0; a < 2; ++a) {
      const auto& row = counts[i * 2 + a];
      double n = 0.0;
      for (double c : row) n += c;
      if (n == 0.0) continue;
      double d = 0.0;
      for (std::size_t j = 0; j < space.size(); ++j) {
        d += std::abs(row[j] / n - env::state_transition_prob(space.state(i), a ? 0 : env::kNoChannel, space.state(j), m));
      }
      tv += 0.5 * d * n / slots;
    }
  }
  const double secs = seconds_since(t0);
  return {tv < 0.02 && worst_sum <= 1e-9 && secs < 30.0,
          fmt::format("TV distance {:.4f} over {} slots, max row-sum error {:.1e}, {:.2f} s", tv, slots, worst_sum,
                      secs)};
}

Verdict learning_oracles() {
  std::mt19937_64 rng(1006);
  double worst_q = 0.0, worst_b = 0.0;
  const int instances = 600;
  for (int trial = 0; trial < instances; ++trial) {
    const int b = std::uniform_int_distribution<int>(1, 2)(rng);
    const int k = std::uniform_int_distribution<int>(1, 2)(rng);
    const int h = std::uniform_int_distribution<int>(1, 3)(rng);
    const auto small = oracle::random_small(rng, b, k);
    const env::StateSpace space(b, k, 1);
    learning::ValueTable v(space, h);
    learning::TransitionCounts f(h, 1);
    for (auto& x : v.raw_values()) x = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    for (auto& x : f.raw()) x = rng() % 4;
    const auto s = space.state(rng() % space.size());
    const int cls = std::uniform_int_distribution<int>(1, h)(rng);
    const double alpha = std::uniform_real_distribution<double>(0.0, 0.99)(rng);
    const auto future = [&](int z) {
      return oracle::future(s, cls, z, v, small.channels, small.model.rates, small.lambda, 0.01, f);
    };

    const int z = s.channels[0].available() && (rng() & 1) ? 0 : env::kNoChannel;
    const double reward = -std::uniform_real_distribution<double>(0.0, 4.0)(rng);
    const double q = learning::compute_stage_q(s, cls, reward, z, v, small.model, f, alpha);
    worst_q = std::max(worst_q, std::abs(q - (reward + alpha * future(z))));

    double expect = 0.0;
    const int level = s.channels[0].level;
    if (level > 0) {
      const int quantum = oracle::quantum(small.model.rates, level, 0.01);
      const int occ = s.buffer.occupancy;
      const double gain =
          oracle::expected_loss(occ, 0, b, small.lambda) - oracle::expected_loss(occ, quantum, b, small.lambda);
      expect = std::max(gain + alpha * (future(0) - future(env::kNoChannel)), 0.0);
    }
    const auto bids = learning::compute_preference_bids(s, cls, v, small.model, f, alpha);
    worst_b = std::max(worst_b, std::abs(bids[0] - expect));
  }
  return {worst_q <= 1e-9 && worst_b <= 1e-9,
          fmt::format("{} instances, max error Q {:.1e}, bids {:.1e}", instances, worst_q, worst_b)};
}

Verdict degeneracy() {
  auto myopic = sim::select_scenarios("two_su_s4").front();
  myopic.horizon = 10000;
  const auto reference = sim::run_scenario(myopic).records;
  const auto bid_stream_matches = [&](const sim::ScenarioConfig& c) {
    const auto recs = sim::run_scenario(c).records;
    for (std::size_t t = 0; t < recs.size(); ++t) {
      if (recs[t].sus[0].bids != reference[t].sus[0].bids) return false;
    }
    return recs.size() == reference.size();
  };
  auto zero_discount = sim::select_scenarios("two_su_s5").front();
  zero_discount.horizon = 10000;
  zero_discount.sus[0].discount = 0.0;
  auto frozen = sim::select_scenarios("two_su_s5").front();
  frozen.horizon = 10000;
  std::get<strategies::LearningPolicy>(frozen.sus[0].policy).freeze_values = true;
  const bool a = bid_stream_matches(zero_discount), b = bid_stream_matches(frozen);
  return {a && b, fmt::format("10000 slots: zero discount {}, frozen values {}", a ? "identical" : "DIFFERS",
                              b ? "identical" : "DIFFERS")};
}

Verdict table2_ordering() {
  const auto t0 = Clock::now();
  return all_of({greater("two_su_s1", 0, "two_su_s3", 0, kCost), greater("two_su_s3", 0, "two_su_s4", 0, kCost),
                 greater("two_su_s4", 0, "two_su_s5", 0, kCost),
                 greater("two_su_s1", 1, "two_su_s2", 1, kCost, 0.8)},
                t0);
}

Verdict table3_direction() {
  const auto t0 = Clock::now();
  std::vector<Comparison> parts;
  for (std::size_t i = 0; i < 4; ++i) parts.push_back(greater("five_su_s2", i, "five_su_s2", 4, kLoss));
  parts.push_back(greater("five_su_s1", 4, "five_su_s2", 4, kLoss));
  return all_of(parts, t0);
}

Verdict table5_scarcity() {
  const auto t0 = Clock::now();
  return all_of({greater("scarcity_s1_myopic", 0, "scarcity_s1_learning", 0, kLoss),
                 greater("scarcity_s2_myopic", 0, "scarcity_s2_learning", 0, kCost),
                 greater("scarcity_s3_myopic", 0, "scarcity_s3_learning", 0, kCost)},
                t0);
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return out;
}

Verdict determinism() {
  const auto root = fs::temp_directory_path() / fmt::format("cogbid-acceptance-{}", ::getpid());
  fs::remove_all(root);
  runner::RunRequest req;
  for (const auto* name : {"two_su_s1", "two_su_s3", "two_su_s5", "five_su_s2", "scarcity_s3_learning"}) {
    req.scenarios.push_back(sim::select_scenarios(name).front());
  }
  req.seeds = {1, 2, 3};
  req.horizon = 3000;
  std::vector<std::map<std::string, std::string>> trees;
  for (int threads : {1, 1, 4}) {
    req.threads = threads;
    req.out_dir = root / fmt::format("run{}", trees.size());
    runner::execute(req);
    trees.push_back(read_tree(req.out_dir));
  }
  fs::remove_all(root);
  const bool same = trees[0] == trees[1] && trees[0] == trees[2];
  return {same && !trees[0].empty(),
          fmt::format("{} files compared across two 1-thread runs and one 4-thread run: {}", trees[0].size(),
                      same ? "byte-identical" : "DIFFER")};
}

struct Criterion {
  int id;
  const char* name;
  Verdict (*run)();
};

const std::vector<Criterion> kCriteria{
    {1, "assignment exactness", assignment_exactness},
    {2, "second-price degeneracy", second_price},
    {3, "VCG properties over a full run", vcg_properties},
    {4, "truthfulness spot check", truthfulness},
    {5, "kernel fidelity", kernel_fidelity},
    {6, "learning-math oracles", learning_oracles},
    {7, "zero-discount / frozen learner equals myopic", degeneracy},
    {8, "two-SU cost ordering", table2_ordering},
    {9, "five-SU learner loss", table3_direction},
    {10, "scarcity effect", table5_scarcity},
    {11, "determinism across runs and threads", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cogbid acceptance suite"};
  std::vector<int> only;
  app.add_option("--only", only, "criterion numbers to run")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  for (const auto& c : kCriteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, fmt::format("threw: {}", e.what())};
    }
    failures += !v.pass;
    fmt::print("{} criterion {:>2} {}: {}\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

#include <gtest/gtest.h>

#include <set>

#include "cogbid/errors.hpp"
#include "cogbid/scenarios.hpp"
#include "cogbid/sim.hpp"

using namespace cogbid;
using namespace cogbid::sim;
using strategies::FixedPolicy;
using strategies::LearningPolicy;
using strategies::MyopicPolicy;

namespace {

ScenarioConfig builtin(const std::string& name) {
  const auto found = select_scenarios(name);
  EXPECT_EQ(found.size(), 1u) << name;
  return found.front();
}

ScenarioConfig shortened(ScenarioConfig c, int horizon, std::uint64_t seed = 1) {
  c.horizon = horizon;
  c.window = std::min(c.window, horizon);
  c.seed = seed;
  return c;
}

SlotRecord record(std::vector<std::pair<int, double>> lost_tax) {
  SlotRecord r;
  for (auto [lost, tax] : lost_tax) {
    SuSlotRecord s;
    s.arrivals = 4;
    s.lost = lost;
    s.tax = tax;
    s.cost = lost - tax;
    r.sus.push_back(s);
  }
  return r;
}

}  // namespace

TEST(RunSlot, LoneSuAlwaysWinsForFree) {
  ScenarioConfig c;
  c.name = "lone";
  c.channels = {default_channel(1.0, 0.0)};
  c.sus = {default_su(MyopicPolicy{})};
  c.horizon = 2000;
  c.window = 1000;
  const auto run = run_scenario(c);
  for (const auto& rec : run.records) {
    EXPECT_EQ(rec.sus[0].channel, 0);
    EXPECT_EQ(rec.sus[0].tax, 0.0);
  }
}

TEST(RunSlot, NoTrafficMeansNothingHappens) {
  auto c = shortened(builtin("two_su_s4"), 3000);
  for (auto& su : c.sus) su.traffic = env::TrafficModel::make(0.0, c.slot_len);
  const auto run = run_scenario(c);
  for (const auto& rec : run.records) {
    for (const auto& s : rec.sus) {
      EXPECT_EQ(s.arrivals, 0);
      EXPECT_EQ(s.lost, 0);
      EXPECT_EQ(s.tax, 0.0);
      for (double b : s.bids) EXPECT_EQ(b, 0.0);
    }
  }
  EXPECT_EQ(run.summary.sus[0].loss_rate_pct, 0.0);
}

TEST(RunScenario, Deterministic) {
  for (const auto& name : {"two_su_s5", "five_su_s2", "two_su_s3"}) {
    const auto c = shortened(builtin(name), 1500, 42);
    const auto a = run_scenario(c), b = run_scenario(c);
    EXPECT_EQ(a.records, b.records) << name;
    EXPECT_EQ(a.summary, b.summary) << name;
  }
  auto c = shortened(builtin("two_su_s4"), 500, 1);
  auto d = c;
  d.seed = 2;
  EXPECT_NE(run_scenario(c).records, run_scenario(d).records);
}

TEST(RunScenario, SingleSlot) {
  auto c = builtin("two_su_s2");
  c.horizon = c.window = 1;
  const auto run = run_scenario(c);
  ASSERT_EQ(run.records.size(), 1u);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& r = run.records[0].sus[i];
    const auto& s = run.summary.sus[i];
    EXPECT_EQ(s.avg_loss, r.lost);
    EXPECT_EQ(s.avg_tax, -r.tax);
    EXPECT_EQ(s.avg_cost, r.cost);
    EXPECT_EQ(s.total_arrived, r.arrivals);
  }
}

TEST(RunScenario, PolicyChangeLeavesOtherRandomnessAlone) {
  const auto a = run_scenario(shortened(builtin("two_su_s4"), 2000, 9));
  const auto b = run_scenario(shortened(builtin("two_su_s5"), 2000, 9));
  for (std::size_t t = 0; t < a.records.size(); ++t) {
    EXPECT_EQ(a.records[t].availability, b.records[t].availability);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_EQ(a.records[t].sus[i].arrivals, b.records[t].sus[i].arrivals);
      EXPECT_EQ(a.records[t].sus[i].levels, b.records[t].sus[i].levels);
    }
  }
}

TEST(RunScenario, InvalidConfigListsEveryViolation) {
  ScenarioConfig c;
  c.horizon = 5;
  c.window = 10;
  auto su = default_su(MyopicPolicy{});
  su.discount = 1.5;
  c.sus = {su};
  const auto v = c.violations();
  EXPECT_EQ(v.size(), 3u);
  try {
    run_scenario(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("channels"), std::string::npos);
    EXPECT_NE(what.find("horizon"), std::string::npos);
    EXPECT_NE(what.find("discount must be in [0,1)"), std::string::npos);
  }
}

TEST(Summarize, HandAverage) {
  const std::vector<SlotRecord> recs{record({{1, 0.0}}), record({{2, -1.0}}), record({{3, 0.0}})};
  const auto s = summarize(recs, 3);
  EXPECT_DOUBLE_EQ(s.sus[0].avg_cost, 7.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.sus[0].avg_loss, 2.0);
  EXPECT_DOUBLE_EQ(s.sus[0].avg_tax, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.sus[0].loss_rate_pct, 50.0);
  EXPECT_DOUBLE_EQ(s.sus[0].avg_reward, -7.0 / 3.0);

  const auto last = summarize(recs, 1);
  EXPECT_EQ(last.sus[0].avg_loss, 3.0);
  EXPECT_EQ(last.sus[0].avg_tax, 0.0);
  EXPECT_EQ(last.sus[0].total_arrived, 4);

  const std::vector<SlotRecord> zeros(4, record({{0, 0.0}, {0, 0.0}}));
  const auto z = summarize(zeros, 4);
  for (const auto& su : z.sus) EXPECT_EQ(su, (SuSummary{0.0, 0.0, 0.0, 0.0, 0.0, 16, 0}));

  EXPECT_THROW(summarize(recs, 4), SizeError);
  EXPECT_THROW(summarize(recs, 0), SizeError);
}

TEST(Invariants, ConservationFeasibilityAndCostIdentity) {
  for (const auto& base : builtin_scenarios()) {
    const auto c = shortened(base, 2000, 5);
    World world(c);
    std::vector<SlotRecord> recs;
    for (int t = 0; t < c.horizon; ++t) recs.push_back(world.step());
    for (std::size_t t = 0; t < recs.size(); ++t) {
      const auto& rec = recs[t];
      std::set<int> held;
      std::size_t available = 0;
      for (bool a : rec.availability) available += a;
      std::size_t assigned = 0;
      for (std::size_t i = 0; i < rec.sus.size(); ++i) {
        const auto& s = rec.sus[i];
        const int cap = c.sus[i].buffer_capacity;
        EXPECT_GE(s.cost, 0.0);
        EXPECT_LE(s.tax, 0.0);
        EXPECT_EQ(s.cost, s.lost - s.tax);
        EXPECT_LE(s.served, s.buffer);
        if (s.channel == env::kNoChannel) {
          EXPECT_EQ(s.served, 0);
          EXPECT_EQ(s.tax, 0.0);
        } else {
          ++assigned;
          EXPECT_TRUE(held.insert(s.channel).second) << "channel held twice";
          EXPECT_TRUE(rec.availability[static_cast<std::size_t>(s.channel)]);
          const int level = s.levels[static_cast<std::size_t>(s.channel)];
          EXPECT_GE(level, 1);
          EXPECT_EQ(s.served, std::min(s.buffer, c.sus[i].rates.quantum(level, c.slot_len)));
          EXPECT_LE(-s.tax, s.bids[static_cast<std::size_t>(s.channel)] + 1e-12);
        }
        const int next = s.buffer - s.served + s.arrivals - s.lost;
        EXPECT_GE(next, 0);
        EXPECT_LE(next, cap);
        EXPECT_EQ(s.lost, std::max(s.buffer - s.served + s.arrivals - cap, 0));
        if (t + 1 < recs.size()) EXPECT_EQ(recs[t + 1].sus[i].buffer, next);
      }
      EXPECT_EQ(assigned, std::min(available, rec.sus.size()));
    }
    const auto stats = summarize(recs, c.window);
    for (const auto& s : stats.sus) {
      EXPECT_NEAR(s.avg_cost, s.avg_loss + s.avg_tax, 1e-12);
      EXPECT_NEAR(s.avg_reward, -s.avg_cost, 1e-12);
      EXPECT_GE(s.loss_rate_pct, 0.0);
      EXPECT_LE(s.loss_rate_pct, 100.0);
    }
  }
}

TEST(Invariants, LearnersUpdateOnceAndOnlyOncePerSlot) {
  const auto c = shortened(builtin("five_su_s2"), 700, 3);
  World world(c);
  for (int t = 0; t < c.horizon; ++t) world.step();
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(world.learner(i), nullptr);
  const auto* l = world.learner(4);
  ASSERT_NE(l, nullptr);
  std::uint64_t visits = 0;
  for (auto v : l->values().raw_visits()) visits += v;
  EXPECT_EQ(visits, 700u);
  EXPECT_EQ(l->counts().total(), 699u);
}

TEST(Symmetry, FixedPairAgreesAcrossSeeds) {
  // Two-sided sign test at 5% over 20 paired seeds: reject when <= 5 or >= 15.
  int first_worse = 0, untied = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto run = run_scenario(shortened(builtin("two_su_s1"), 20000, seed));
    const double a = run.summary.sus[0].loss_rate_pct, b = run.summary.sus[1].loss_rate_pct;
    if (a == b) continue;
    ++untied;
    first_worse += a > b;
  }
  ASSERT_GE(untied, 10);
  EXPECT_GT(first_worse, 5);
  EXPECT_LT(first_worse, 15);
}

TEST(Catalog, Contents) {
  const auto& all = builtin_scenarios();
  std::vector<std::string> names;
  for (const auto& c : all) names.push_back(c.name);
  EXPECT_EQ(names, (std::vector<std::string>{"two_su_s1", "two_su_s2", "two_su_s3", "two_su_s4", "two_su_s5",
                                             "five_su_s1", "five_su_s2", "scarcity_s1_myopic",
                                             "scarcity_s1_learning", "scarcity_s2_myopic", "scarcity_s2_learning",
                                             "scarcity_s3_myopic", "scarcity_s3_learning"}));
  for (const auto& c : all) {
    EXPECT_TRUE(c.violations().empty()) << c.name;
    EXPECT_EQ(c.slot_len, 0.01);
    EXPECT_EQ(c.window, 1000);
    for (const auto& ch : c.channels) {
      EXPECT_EQ(ch.snr_db, (std::vector<double>{18.0, 23.0, 26.0}));
      EXPECT_EQ(ch.entry_dist, (std::vector<double>{0.4, 0.4, 0.2}));
      for (const auto& row : ch.cond_trans) EXPECT_EQ(row, (std::vector<double>{0.4, 0.4, 0.2}));
    }
    for (const auto& su : c.sus) {
      EXPECT_EQ(su.discount, 0.8);
      EXPECT_EQ(su.buffer_capacity, 10);
      EXPECT_DOUBLE_EQ(su.traffic.mean_per_slot(), 2.5);
    }
  }
}

TEST(Catalog, PolicyPairings) {
  const auto s5 = builtin("two_su_s5");
  EXPECT_EQ(strategies::policy_name(s5.sus[0].policy), "learning");
  EXPECT_EQ(strategies::policy_name(s5.sus[1].policy), "myopic");
  EXPECT_EQ(s5.sus[0].discount, 0.8);
  EXPECT_EQ(s5.channels[0].p_nf, 0.5);
  EXPECT_EQ(s5.channels[0].p_fn, 0.5);

  const auto f2 = builtin("five_su_s2");
  ASSERT_EQ(f2.sus.size(), 5u);
  ASSERT_EQ(f2.channels.size(), 3u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(strategies::policy_name(f2.sus[i].policy), "myopic");
  EXPECT_EQ(strategies::policy_name(f2.sus[4].policy), "learning");
  EXPECT_EQ(f2.channels[0].p_nf, 0.7);
  EXPECT_EQ(f2.channels[0].p_fn, 0.3);

  const auto s3 = select_scenarios("scarcity_s3");
  ASSERT_EQ(s3.size(), 2u);
  for (const auto& c : s3) {
    EXPECT_EQ(c.channels[0].p_nf, 0.4);
    EXPECT_EQ(c.channels[0].p_fn, 0.6);
  }
  EXPECT_EQ(select_scenarios("scarcity_s1")[0].channels[0].p_nf, 0.8);
  EXPECT_THROW(select_scenarios("nope"), ConfigError);
}

TEST(Catalog, FixedDefaultsResolved) {
  const auto s1 = builtin("two_su_s1");
  const auto& bids = std::get<FixedPolicy>(s1.sus[0].policy).bids;
  EXPECT_EQ(bids, strategies::default_fixed_bids(su_environment(s1, 0)));
  const auto s5 = builtin("two_su_s5");
  EXPECT_EQ(std::get<LearningPolicy>(s5.sus[0].policy).gamma_max,
            strategies::max_myopic_bid(su_environment(s5, 0)));
}

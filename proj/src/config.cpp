#include "cogbid/config.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <fstream>
#include <sstream>

#include "cogbid/errors.hpp"
#include "cogbid/scenarios.hpp"

namespace cogbid::config {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 4> kPolicies{"fixed", "source_aware", "myopic", "learning"};
constexpr std::array<std::string_view, 8> kTopKeys{"base",    "name",   "slot_len", "horizon",
                                                   "window",  "seed",   "channels", "sus"};
constexpr std::array<std::string_view, 5> kChannelKeys{"p_nf", "p_fn", "snr_db", "entry", "cond"};
constexpr std::array<std::string_view, 13> kSuKeys{
    "policy",        "discount", "buffer", "arrival_pps", "arrival_bps",   "packet_bytes", "packets_per_slot",
    "rates_pps",     "bids",     "classes", "gamma_max",  "epsilon",       "freeze_values"};

class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  template <std::size_t N>
  void known_keys(const json& obj, const std::string& path, const std::array<std::string_view, N>& allowed) {
    for (const auto& [key, _] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
      std::string msg = "unknown field";
      const auto hint = suggest(key, allowed);
      if (!hint.empty()) msg += " (did you mean '" + hint + "'?)";
      fail(join(path, key), msg);
    }
  }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }

  void number(const json& obj, const std::string& path, const char* key, double& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number()) return fail(join(path, key), "expected a number");
    out = it->get<double>();
  }

  void integer(const json& obj, const std::string& path, const char* key, int& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number_integer()) return fail(join(path, key), "expected an integer");
    const auto v = it->get<std::int64_t>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      return fail(join(path, key), "integer out of range");
    }
    out = static_cast<int>(v);
  }

  void seed(const json& obj, const std::string& path, const char* key, std::uint64_t& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number_unsigned()) return fail(join(path, key), "expected a nonnegative integer");
    out = it->get<std::uint64_t>();
  }

  void boolean(const json& obj, const std::string& path, const char* key, bool& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_boolean()) return fail(join(path, key), "expected true or false");
    out = it->get<bool>();
  }

  void string(const json& obj, const std::string& path, const char* key, std::string& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_string()) return fail(join(path, key), "expected a string");
    out = it->get<std::string>();
  }

  template <class T>
  bool list(const json& j, const std::string& path, std::vector<T>& out) {
    if (!j.is_array()) {
      fail(path, "expected an array");
      return false;
    }
    std::vector<T> tmp;
    for (const auto& x : j) {
      const bool ok = std::is_integral_v<T> ? x.is_number_integer() : x.is_number();
      if (!ok) {
        fail(path, std::is_integral_v<T> ? "expected an array of integers" : "expected an array of numbers");
        return false;
      }
      tmp.push_back(x.get<T>());
    }
    out = std::move(tmp);
    return true;
  }

  template <class T>
  void list(const json& obj, const std::string& path, const char* key, std::vector<T>& out) {
    const auto it = obj.find(key);
    if (it != obj.end()) list(*it, join(path, key), out);
  }
};

std::string index_path(const char* name, std::size_t i) { return std::string(name) + "[" + std::to_string(i) + "]"; }

void read_channel(Reader& r, const json& j, const std::string& path, env::ChannelModel& c) {
  if (!r.object(j, path)) return;
  r.known_keys(j, path, kChannelKeys);
  r.number(j, path, "p_nf", c.p_nf);
  r.number(j, path, "p_fn", c.p_fn);
  r.list(j, path, "snr_db", c.snr_db);
  r.list(j, path, "entry", c.entry_dist);
  if (const auto it = j.find("cond"); it != j.end()) {
    const auto p = Reader::join(path, "cond");
    if (!it->is_array()) return r.fail(p, "expected an array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < it->size(); ++k) {
      std::vector<double> row;
      if (!r.list((*it)[k], index_path(p.c_str(), k), row)) return;
      rows.push_back(std::move(row));
    }
    c.cond_trans = std::move(rows);
  }
}

strategies::Policy policy_named(std::string_view name) {
  if (name == "fixed") return strategies::FixedPolicy{};
  if (name == "source_aware") return strategies::SourceAwarePolicy{};
  if (name == "learning") return strategies::LearningPolicy{};
  return strategies::MyopicPolicy{};
}

void read_policy(Reader& r, const json& j, const std::string& path, sim::SuConfig& su) {
  if (const auto it = j.find("policy"); it != j.end()) {
    const auto p = Reader::join(path, "policy");
    if (!it->is_string()) {
      r.fail(p, "expected a policy name");
    } else {
      const auto name = it->get<std::string>();
      if (std::find(kPolicies.begin(), kPolicies.end(), name) == kPolicies.end()) {
        std::string msg = "unknown policy '" + name + "'; expected one of fixed, source_aware, myopic, learning";
        const auto hint = suggest(name, kPolicies);
        if (!hint.empty()) msg += " (did you mean '" + hint + "'?)";
        r.fail(p, msg);
      } else if (name != strategies::policy_name(su.policy)) {
        su.policy = policy_named(name);
      }
    }
  }

  auto* fixed = std::get_if<strategies::FixedPolicy>(&su.policy);
  auto* learning = std::get_if<strategies::LearningPolicy>(&su.policy);

  // Resolved defaults are recomputed unless given explicitly, so that
  // overriding the buffer or traffic of a base SU updates them too.
  if (fixed) fixed->bids.clear();
  if (learning) learning->gamma_max.reset();

  if (j.contains("bids")) {
    if (!fixed) {
      r.fail(Reader::join(path, "bids"), "only valid for the fixed policy");
    } else {
      r.list(j, path, "bids", fixed->bids);
      if (std::any_of(fixed->bids.begin(), fixed->bids.end(), [](double b) { return !(b >= 0.0); })) {
        r.fail(Reader::join(path, "bids"), "bids must be >= 0");
      }
    }
  }
  for (const char* key : {"classes", "gamma_max", "epsilon", "freeze_values"}) {
    if (j.contains(key) && !learning) r.fail(Reader::join(path, key), "only valid for the learning policy");
  }
  if (learning) {
    r.integer(j, path, "classes", learning->classes);
    if (j.contains("gamma_max")) {
      double g = 0.0;
      r.number(j, path, "gamma_max", g);
      learning->gamma_max = g;
    }
    r.number(j, path, "epsilon", learning->epsilon);
    r.boolean(j, path, "freeze_values", learning->freeze_values);
  }
}

void read_su(Reader& r, const json& j, const std::string& path, double slot_len, sim::SuConfig& su) {
  if (!r.object(j, path)) return;
  r.known_keys(j, path, kSuKeys);
  read_policy(r, j, path, su);
  r.number(j, path, "discount", su.discount);
  r.integer(j, path, "buffer", su.buffer_capacity);

  double mu = su.traffic.mu;
  if (j.contains("arrival_pps") && j.contains("arrival_bps")) {
    r.fail(Reader::join(path, "arrival_pps"), "give either arrival_pps or arrival_bps, not both");
  }
  r.number(j, path, "arrival_pps", mu);
  if (j.contains("arrival_bps")) {
    double bps = 0.0;
    int bytes = sim::Defaults::kPacketBytes;
    r.number(j, path, "arrival_bps", bps);
    r.integer(j, path, "packet_bytes", bytes);
    if (bytes < 1) r.fail(Reader::join(path, "packet_bytes"), "must be >= 1");
    else mu = sim::packets_per_second(bps, bytes);
  } else if (j.contains("packet_bytes")) {
    r.fail(Reader::join(path, "packet_bytes"), "only meaningful together with arrival_bps");
  }
  su.traffic = env::TrafficModel::make(mu, slot_len);

  if (j.contains("packets_per_slot") && j.contains("rates_pps")) {
    r.fail(Reader::join(path, "rates_pps"), "give either packets_per_slot or rates_pps, not both");
  }
  if (j.contains("packets_per_slot")) {
    std::vector<int> per_slot;
    r.list(j, path, "packets_per_slot", per_slot);
    su.rates = env::RateTable::from_packets_per_slot(per_slot, slot_len);
  }
  r.list(j, path, "rates_pps", su.rates.rate_per_level);
}

sim::ScenarioConfig blank() {
  sim::ScenarioConfig c;
  c.name = "custom";
  c.slot_len = sim::Defaults::kSlotLen;
  c.horizon = sim::Defaults::kHorizon;
  c.window = sim::Defaults::kWindow;
  c.seed = 1;
  return c;
}

}  // namespace

std::string suggest(std::string_view word, std::span<const std::string_view> known) {
  std::string best;
  std::size_t best_d = std::max<std::size_t>(2, word.size() / 3) + 1;
  for (const auto cand : known) {
    std::vector<std::size_t> prev(cand.size() + 1), cur(cand.size() + 1);
    for (std::size_t b = 0; b <= cand.size(); ++b) prev[b] = b;
    for (std::size_t a = 1; a <= word.size(); ++a) {
      cur[0] = a;
      for (std::size_t b = 1; b <= cand.size(); ++b) {
        const std::size_t sub = prev[b - 1] + (word[a - 1] == cand[b - 1] ? 0 : 1);
        cur[b] = std::min({prev[b] + 1, cur[b - 1] + 1, sub});
      }
      std::swap(prev, cur);
    }
    if (prev[cand.size()] < best_d) {
      best_d = prev[cand.size()];
      best = cand;
    }
  }
  return best;
}

sim::ScenarioConfig parse_config(const json& doc) {
  Reader r;
  if (!r.object(doc, "config")) throw ConfigError(r.errors);
  r.known_keys(doc, "", kTopKeys);

  sim::ScenarioConfig c = blank();
  if (const auto it = doc.find("base"); it != doc.end()) {
    if (!it->is_string()) {
      r.fail("base", "expected a built-in scenario name");
    } else {
      const auto name = it->get<std::string>();
      const auto& catalog = sim::builtin_scenarios();
      const auto found = std::find_if(catalog.begin(), catalog.end(), [&](const auto& s) { return s.name == name; });
      if (found == catalog.end()) {
        std::vector<std::string_view> names;
        for (const auto& s : catalog) names.push_back(s.name);
        std::string msg = "unknown built-in scenario '" + name + "'";
        const auto hint = suggest(name, names);
        if (!hint.empty()) msg += " (did you mean '" + hint + "'?)";
        r.fail("base", msg);
      } else {
        c = *found;
      }
    }
  }

  r.string(doc, "", "name", c.name);
  r.number(doc, "", "slot_len", c.slot_len);
  r.integer(doc, "", "horizon", c.horizon);
  r.integer(doc, "", "window", c.window);
  r.seed(doc, "", "seed", c.seed);
  if (!(c.slot_len > 0.0)) {
    r.fail("slot_len", "must be > 0");
    throw ConfigError(r.errors);
  }

  if (const auto it = doc.find("channels"); it != doc.end()) {
    if (!it->is_array()) {
      r.fail("channels", "expected an array");
    } else {
      std::vector<env::ChannelModel> channels;
      for (std::size_t k = 0; k < it->size(); ++k) {
        auto ch = k < c.channels.size() ? c.channels[k] : sim::default_channel(0.5, 0.5);
        read_channel(r, (*it)[k], index_path("channels", k), ch);
        channels.push_back(std::move(ch));
      }
      c.channels = std::move(channels);
    }
  }

  const json empty = json::object();
  const json* sus = &empty;
  if (const auto it = doc.find("sus"); it != doc.end()) {
    if (!it->is_array()) r.fail("sus", "expected an array");
    else sus = &*it;
  }
  std::vector<sim::SuConfig> out;
  const std::size_t count = sus->is_array() ? sus->size() : c.sus.size();
  for (std::size_t i = 0; i < count; ++i) {
    auto su = i < c.sus.size() ? c.sus[i] : sim::default_su(strategies::MyopicPolicy{}, c.slot_len);
    const json& entry = sus->is_array() ? (*sus)[i] : empty;
    read_su(r, entry, index_path("sus", i), c.slot_len, su);
    out.push_back(std::move(su));
  }
  c.sus = std::move(out);

  if (!r.errors.empty()) throw ConfigError(r.errors);
  sim::resolve_defaults(c);
  return c;
}

sim::ScenarioConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

sim::ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    const std::string body = text.str();
    return parse_config(std::string_view(body));
  } catch (const ConfigError& e) {
    std::vector<std::string> v;
    for (const auto& msg : e.violations()) v.push_back(path.string() + ": " + msg);
    throw ConfigError(std::move(v));
  }
}

json to_json(const sim::ScenarioConfig& c) {
  json doc;
  doc["name"] = c.name;
  doc["slot_len"] = c.slot_len;
  doc["horizon"] = c.horizon;
  doc["window"] = c.window;
  doc["seed"] = c.seed;
  doc["channels"] = json::array();
  for (const auto& ch : c.channels) {
    doc["channels"].push_back(
        {{"p_nf", ch.p_nf}, {"p_fn", ch.p_fn}, {"snr_db", ch.snr_db}, {"entry", ch.entry_dist}, {"cond", ch.cond_trans}});
  }
  doc["sus"] = json::array();
  for (const auto& su : c.sus) {
    json s;
    s["policy"] = strategies::policy_name(su.policy);
    s["discount"] = su.discount;
    s["buffer"] = su.buffer_capacity;
    s["arrival_pps"] = su.traffic.mu;
    s["rates_pps"] = su.rates.rate_per_level;
    if (const auto* f = std::get_if<strategies::FixedPolicy>(&su.policy)) s["bids"] = f->bids;
    if (const auto* l = std::get_if<strategies::LearningPolicy>(&su.policy)) {
      s["classes"] = l->classes;
      if (l->gamma_max) s["gamma_max"] = *l->gamma_max;
      s["epsilon"] = l->epsilon;
      s["freeze_values"] = l->freeze_values;
    }
    doc["sus"].push_back(std::move(s));
  }
  return doc;
}

}  // namespace cogbid::config

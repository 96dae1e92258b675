#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace cli {
namespace {

using nlohmann::json;

// Maps a dotted field path back to a line of the source text by locating each
// key in turn after the previous one.
class Locator {
 public:
  explicit Locator(const std::string& text) : text_(text) {}

  int line_of(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    for (const std::string& key : path) {
      const std::size_t found = text_.find("\"" + key + "\"", pos);
      if (found == std::string::npos) break;
      pos = found;
    }
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
  }

 private:
  const std::string& text_;
};

class Reader {
 public:
  Reader(const json& node, std::vector<std::string> path, const Locator& loc, const std::string& source)
      : node_(node), path_(std::move(path)), loc_(loc), source_(source) {}

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    std::vector<std::string> full = path_;
    if (!key.empty()) full.push_back(key);
    std::string dotted;
    for (const auto& p : full) dotted += (dotted.empty() ? "" : ".") + p;
    std::ostringstream msg;
    msg << source_ << ":" << loc_.line_of(full) << ": field '" << (dotted.empty() ? "<root>" : dotted) << "': " << what;
    throw ConfigError(msg.str());
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    if (!node_.is_object()) fail("", "expected an object");
    for (const auto& [key, value] : node_.items()) {
      (void)value;
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
        fail(key, "unknown key");
      }
    }
  }

  bool has(const char* key) const { return node_.contains(key); }

  Reader child(const char* key) const {
    if (!node_.at(key).is_object()) fail(key, "expected an object");
    std::vector<std::string> p = path_;
    p.emplace_back(key);
    return Reader(node_.at(key), std::move(p), loc_, source_);
  }

  std::optional<double> number(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = node_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "expected a finite number");
    return x;
  }

  template <class Int>
  std::optional<Int> integer(const char* key) const {
    if (!has(key)) return std::nullopt;
    return to_integer<Int>(node_.at(key), key);
  }

  std::optional<std::string> string(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = node_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  template <class T>
  std::optional<std::vector<T>> list(const char* key) const {
    if (!has(key)) return std::nullopt;
    const json& v = node_.at(key);
    if (!v.is_array()) fail(key, "expected an array");
    std::vector<T> out;
    for (const json& e : v) {
      if constexpr (std::is_floating_point_v<T>) {
        if (!e.is_number()) fail(key, "expected an array of numbers");
        out.push_back(e.get<T>());
      } else {
        out.push_back(to_integer<T>(e, key));
      }
    }
    return out;
  }

  template <class T>
  T required(const std::optional<T>& v, const char* key) const {
    if (!v) fail(key, "required key missing");
    return *v;
  }

 private:
  template <class Int>
  Int to_integer(const json& v, const char* key) const {
    if (v.is_number_integer()) {
      if constexpr (std::is_unsigned_v<Int>) {
        if (v.is_number_unsigned()) return static_cast<Int>(v.get<std::uint64_t>());
        fail(key, "expected a nonnegative integer");
      } else {
        const auto x = v.get<std::int64_t>();
        if (x < std::numeric_limits<Int>::min() || x > std::numeric_limits<Int>::max()) fail(key, "integer out of range");
        return static_cast<Int>(x);
      }
    }
    fail(key, "expected an integer");
  }

  const json& node_;
  std::vector<std::string> path_;
  const Locator& loc_;
  const std::string& source_;
};

csl_costs read_costs(const Reader& r) {
  r.allow_only({"A_R", "c_R", "h", "A_D", "c_D", "omega", "omega_sq"});
  csl_costs c{};
  c.replenish_fixed = r.required(r.number("A_R"), "A_R");
  c.replenish_unit = r.required(r.number("c_R"), "c_R");
  c.holding = r.required(r.number("h"), "h");
  c.dispatch_fixed = r.required(r.number("A_D"), "A_D");
  c.dispatch_unit = r.required(r.number("c_D"), "c_D");
  c.wait_linear = r.required(r.number("omega"), "omega");
  c.wait_squared = r.number("omega_sq").value_or(0.0);
  return c;
}

template <class Parse>
auto enum_field(const Reader& r, const char* key, Parse parse) -> std::optional<decltype(parse(std::string{}))> {
  const auto s = r.string(key);
  if (!s) return std::nullopt;
  try {
    return parse(*s);
  } catch (const ConfigError& e) {
    r.fail(key, e.what());
  }
}

}  // namespace

csl_mode parse_mode(const std::string& s) {
  if (s == "exact") return CSL_MODE_EXACT;
  if (s == "approx") return CSL_MODE_APPROX;
  throw ConfigError("mode must be 'exact' or 'approx', got '" + s + "'");
}

csl_delay parse_delay(const std::string& s) {
  if (s == "linear") return CSL_DELAY_LINEAR;
  if (s == "squared") return CSL_DELAY_SQUARED;
  throw ConfigError("delay must be 'linear' or 'squared', got '" + s + "'");
}

csl_policy_kind parse_policy_kind(const std::string& s) {
  if (s == "QP") return CSL_POLICY_QP;
  if (s == "TP") return CSL_POLICY_TP;
  if (s == "HP") return CSL_POLICY_HP;
  throw ConfigError("policy type must be 'QP', 'TP' or 'HP', got '" + s + "'");
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  const Locator loc(text);
  const Reader root(doc, {}, loc, source);
  root.allow_only({"lambda", "policy", "Q", "costs", "mode", "delay", "simulation", "compare", "verify", "optimize",
                   "output"});

  RunConfig cfg;
  cfg.source = source;
  cfg.lambda = root.number("lambda");
  cfg.Q = root.integer<long>("Q");
  if (root.has("costs")) cfg.costs = read_costs(root.child("costs"));
  cfg.mode = enum_field(root, "mode", parse_mode);
  cfg.delay = enum_field(root, "delay", parse_delay);

  if (root.has("policy")) {
    const Reader p = root.child("policy");
    p.allow_only({"type", "q", "n", "T"});
    PolicySection ps;
    ps.kind = p.required(enum_field(p, "type", parse_policy_kind), "type");
    ps.q = p.integer<int>("q");
    ps.n = p.integer<long>("n");
    ps.T = p.number("T");
    switch (ps.kind) {
      case CSL_POLICY_QP:
        p.required(ps.q, "q");
        p.required(ps.n, "n");
        if (ps.T) p.fail("T", "not used by QP");
        break;
      case CSL_POLICY_TP:
        p.required(ps.T, "T");
        if (ps.q) p.fail("q", "not used by TP");
        if (ps.n) p.fail("n", "not used by TP");
        break;
      case CSL_POLICY_HP:
        p.required(ps.q, "q");
        p.required(ps.T, "T");
        if (ps.n) p.fail("n", "not used by HP");
        break;
    }
    if (ps.kind == CSL_POLICY_QP && cfg.Q) root.fail("Q", "QP derives Q from q and n; remove Q");
    if (ps.kind != CSL_POLICY_QP && !cfg.Q) root.fail("Q", "required key missing");
    cfg.policy = ps;
  }

  if (root.has("simulation")) {
    const Reader s = root.child("simulation");
    s.allow_only({"cycles", "seed", "batch_size", "threads"});
    cfg.simulation.cycles = s.integer<long>("cycles");
    cfg.simulation.seed = s.integer<std::uint64_t>("seed");
    cfg.simulation.batch_size = s.integer<long>("batch_size");
    cfg.simulation.threads = s.integer<unsigned>("threads");
  }

  if (root.has("compare")) {
    const Reader c = root.child("compare");
    c.allow_only({"target_elc", "target_elr", "qh_list"});
    cfg.compare.target_elc = c.number("target_elc");
    cfg.compare.target_elr = c.number("target_elr");
    cfg.compare.qh_list = c.list<int>("qh_list").value_or(std::vector<int>{});
  }

  if (root.has("verify")) {
    const Reader v = root.child("verify");
    v.allow_only({"lambdas", "q_values", "qh_offsets", "elr_ratios", "costs"});
    cfg.verify.lambdas = v.list<double>("lambdas");
    cfg.verify.q_values = v.list<int>("q_values");
    cfg.verify.qh_offsets = v.list<int>("qh_offsets");
    cfg.verify.elr_ratios = v.list<long>("elr_ratios");
    if (v.has("costs")) cfg.verify.costs = read_costs(v.child("costs"));
  }

  if (root.has("optimize")) {
    const Reader o = root.child("optimize");
    o.allow_only({"policy", "q_max", "Q_max", "T_max"});
    cfg.optimize.kind = enum_field(o, "policy", parse_policy_kind);
    cfg.optimize.q_max = o.integer<int>("q_max");
    cfg.optimize.Q_max = o.integer<long>("Q_max");
    cfg.optimize.T_max = o.number("T_max");
  }

  if (root.has("output")) {
    const Reader o = root.child("output");
    o.allow_only({"path", "format", "trace"});
    cfg.output.path = o.string("path");
    cfg.output.format = o.string("format");
    cfg.output.trace = o.string("trace");
    if (cfg.output.format && *cfg.output.format != "json" && *cfg.output.format != "csv") {
      o.fail("format", "expected 'json' or 'csv'");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

csl_system_desc system_desc(const RunConfig& cfg) {
  if (!cfg.lambda) throw ConfigError(cfg.source + ": field 'lambda': required key missing");
  if (!cfg.policy) throw ConfigError(cfg.source + ": field 'policy': required key missing");
  if (!cfg.costs) throw ConfigError(cfg.source + ": field 'costs': required key missing");
  csl_system_desc d{};
  d.lambda = *cfg.lambda;
  d.kind = cfg.policy->kind;
  d.q = cfg.policy->q.value_or(0);
  d.n = cfg.policy->n.value_or(0);
  d.T = cfg.policy->T.value_or(0.0);
  d.Q = cfg.Q.value_or(0);
  d.costs = *cfg.costs;
  return d;
}

}  // namespace cli

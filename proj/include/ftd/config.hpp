#pragma once

// JSON experiment configuration (schema_version 1). Unknown keys are rejected
// and every error names the offending field path.

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ftd/conditions.hpp"
#include "ftd/controllers.hpp"
#include "ftd/delay.hpp"
#include "ftd/error.hpp"
#include "ftd/experiments.hpp"
#include "ftd/integrator.hpp"
#include "ftd/network.hpp"

namespace ftd {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum class ExperimentKind { Scalar, Network };

struct DelayConfig {
  /// proportional | constant | per_component_sin | custom_grid
  std::string kind = "proportional";
  double q = 0.5;
  double value = 0.0;
  double scale = 0.5;
  double amplitude = 0.1;
  std::size_t components = 1;
  std::vector<double> times;
  std::vector<std::vector<double>> values;
};

struct RateConfig {
  /// power | exponential
  std::string kind = "power";
  double parameter = 0.1;
};

struct ScalarConfig {
  double c1 = 1.0;
  double c2 = 2.0;
  std::vector<double> initial{2.0};
  double c3 = 2.1;
  double c4 = 3.5;
  std::optional<AdaptiveRates> adaptive;
};

struct NetworkConfig {
  std::size_t nodes = 3;
  std::size_t node_dim = 3;
  /// lorenz
  std::string f = "lorenz";
  /// sin_plus_linear
  std::string g = "sin_plus_linear";
  std::vector<std::vector<double>> a;
  std::vector<std::vector<double>> b;
  double theta1 = 0.1;
  double theta2 = 1.0;
  std::optional<double> lipschitz_f;
  std::optional<double> lipschitz_g;
  SyncMode mode = SyncMode::Outer;
  std::vector<double> drive_initial;
  std::vector<double> response_initial;
  std::vector<double> reference_initial;
  NetworkControlKind control = NetworkControlKind::None;
  double sigma = 1.0;
  double theta3 = 0.0;
  double theta4 = 0.0;
  std::optional<NetworkAdaptive> adaptive;
};

struct MonitorConfig {
  Norm norm = Norm::Two;
  double kappa = 0.9;
  std::optional<double> eps1;
  std::optional<double> start_time;
  double deriv_tol = 1e-6;
  /// Treat an infeasible condition as a failed guarantee (exit code 2).
  bool guarantee = false;
};

struct OutputConfig {
  std::string directory = ".";
  std::string prefix = "run";
  std::size_t stride = 1;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  ExperimentKind kind = ExperimentKind::Scalar;
  ScalarConfig scalar;
  NetworkConfig network;
  DelayConfig delay;
  RateConfig rate;
  IntegratorConfig integrator;
  MonitorConfig monitor;
  OutputConfig output;
};

namespace detail {

/// Reads one JSON object, remembering which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  double number(const std::string& key, double fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(field(key), "must be finite");
    return d;
  }

  std::optional<double> optional_number(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return number(key, 0.0);
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(field(key), "expected a non-negative integer");
    }
    return v.get<std::size_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean()) throw ConfigError(field(key), "expected true or false");
    return j_.at(key).get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    if (!j_.at(key).is_string()) throw ConfigError(field(key), "expected a string");
    return j_.at(key).get<std::string>();
  }

  std::vector<double> vector(const std::string& key, std::vector<double> fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(field(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::vector<double>> matrix(const std::string& key,
                                          std::vector<std::vector<double>> fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of rows");
    std::vector<std::vector<double>> out;
    for (const auto& row : v) {
      if (!row.is_array()) throw ConfigError(field(key), "expected an array of rows");
      std::vector<double> r;
      for (const auto& e : row) {
        if (!e.is_number()) throw ConfigError(field(key), "matrix entries must be numbers");
        r.push_back(e.get<double>());
      }
      out.push_back(std::move(r));
    }
    return out;
  }

  template <class E>
  E choice(const std::string& key, E fallback,
           std::initializer_list<std::pair<const char*, E>> options) {
    used_.insert(key);
    if (!has(key)) return fallback;
    const std::string s = string(key, "");
    std::string allowed;
    for (const auto& [name, value] : options) {
      if (s == name) return value;
      allowed += allowed.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError(field(key), "unknown value '" + s + "' (expected one of " + allowed + ")");
  }

  /// Throws for any key that was never read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

inline AdaptiveRates read_rates(ObjectReader& r, AdaptiveRates fallback) {
  AdaptiveRates a;
  a.d1 = r.number("d1", fallback.d1);
  a.d2 = r.number("d2", fallback.d2);
  a.d3 = r.number("d3", fallback.d3);
  require(a.d1 > 0.0, r.field("d1"), "must be > 0");
  require(a.d2 > 0.0, r.field("d2"), "must be > 0");
  require(a.d3 > 0.0, r.field("d3"), "must be > 0");
  return a;
}

inline const char* kind_name(NetworkControlKind k) {
  switch (k) {
    case NetworkControlKind::None: return "none";
    case NetworkControlKind::Pinning: return "pinning";
    case NetworkControlKind::FullNode: return "full_node";
  }
  return "none";
}

inline json matrix_json(const std::vector<std::vector<double>>& m) {
  json out = json::array();
  for (const auto& row : m) out.push_back(row);
  return out;
}

}  // namespace detail

inline std::vector<std::vector<double>> matrix_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(m(i, j));
  }
  return rows;
}

/// Example 1 defaults: c3 = 2.1, c4 = 3.5, q = 0.5, mu = t^0.1, h = 1e-3, horizon 30.
inline ExperimentConfig example1_config() {
  ExperimentConfig c;
  c.kind = ExperimentKind::Scalar;
  c.monitor.eps1 = std::pow(2.0, 0.05);
  return c;
}

/// Example 2 defaults: the Lorenz preset, uncontrolled, h = 5e-4, horizon 20.
inline ExperimentConfig example2_config() {
  const SyncExperiment preset = lorenz_preset();
  ExperimentConfig c;
  c.kind = ExperimentKind::Network;
  auto& n = c.network;
  n.nodes = preset.model.nodes;
  n.node_dim = preset.model.node_dim;
  n.a = matrix_rows(preset.model.a);
  n.b = matrix_rows(preset.model.b);
  n.theta1 = preset.model.theta1;
  n.theta2 = preset.model.theta2;
  n.drive_initial = preset.drive_initial;
  n.response_initial = preset.response_initial;
  c.delay.kind = "per_component_sin";
  c.delay.scale = 0.5;
  c.delay.amplitude = 0.1;
  c.integrator = preset.integrator;
  return c;
}

inline ExperimentConfig parse_config(const json& j) {
  using detail::require;
  detail::ObjectReader root(j, "");
  require(root.has("schema_version"), "schema_version", "missing");
  const auto& sv = root.raw("schema_version");
  require(sv.is_number_integer(), "schema_version", "expected an integer");
  require(sv.get<long long>() == kSchemaVersion, "schema_version",
          "unsupported version " + sv.dump() + " (expected 1)");
  require(root.has("kind"), "kind", "missing");
  const auto kind = root.choice<ExperimentKind>(
      "kind", ExperimentKind::Scalar,
      {{"scalar", ExperimentKind::Scalar}, {"network", ExperimentKind::Network}});

  ExperimentConfig c = kind == ExperimentKind::Scalar ? example1_config() : example2_config();
  c.kind = kind;

  if (kind == ExperimentKind::Scalar) {
    auto& s = c.scalar;
    if (root.has("system")) {
      detail::ObjectReader r(root.raw("system"), "system");
      s.c1 = r.number("c1", s.c1);
      s.c2 = r.number("c2", s.c2);
      s.initial = r.vector("initial", s.initial);
      require(!s.initial.empty(), "system.initial", "must be non-empty");
      r.finish();
    }
    if (root.has("gains")) {
      detail::ObjectReader r(root.raw("gains"), "gains");
      s.c3 = r.number("c3", s.c3);
      s.c4 = r.number("c4", s.c4);
      require(s.c3 >= 0.0, "gains.c3", "must be >= 0");
      require(s.c4 >= 0.0, "gains.c4", "must be >= 0");
      r.finish();
    }
    if (root.has("adaptive")) {
      detail::ObjectReader r(root.raw("adaptive"), "adaptive");
      s.adaptive = detail::read_rates(r, AdaptiveRates{});
      r.finish();
    }
  } else {
    auto& n = c.network;
    if (root.has("system")) {
      detail::ObjectReader r(root.raw("system"), "system");
      n.nodes = r.count("nodes", n.nodes);
      n.node_dim = r.count("node_dim", n.node_dim);
      n.f = r.string("f", n.f);
      n.g = r.string("g", n.g);
      require(n.f == "lorenz", "system.f", "unknown node dynamics '" + n.f + "' (expected lorenz)");
      require(n.g == "sin_plus_linear", "system.g",
              "unknown coupling function '" + n.g + "' (expected sin_plus_linear)");
      require(n.node_dim == 3, "system.node_dim", "lorenz nodes have dimension 3");
      require(n.nodes >= 1, "system.nodes", "must be >= 1");
      n.a = r.matrix("a", n.a);
      n.b = r.matrix("b", n.b);
      n.theta1 = r.number("theta1", n.theta1);
      n.theta2 = r.number("theta2", n.theta2);
      n.lipschitz_f = r.optional_number("lipschitz_f");
      n.lipschitz_g = r.optional_number("lipschitz_g");
      n.mode = r.choice<SyncMode>("mode", n.mode,
                                  {{"outer", SyncMode::Outer}, {"inner", SyncMode::Inner}});
      n.drive_initial = r.vector("drive_initial", n.drive_initial);
      n.response_initial = r.vector("response_initial", n.response_initial);
      n.reference_initial = r.vector("reference_initial", n.reference_initial);
      r.finish();
      for (const char* key : {"a", "b"}) {
        const auto& m = std::string(key) == "a" ? n.a : n.b;
        require(m.size() == n.nodes, std::string("system.") + key, "must have N rows");
        for (const auto& row : m) {
          require(row.size() == n.nodes, std::string("system.") + key, "must have N columns");
        }
      }
      Matrix a(static_cast<Eigen::Index>(n.nodes), static_cast<Eigen::Index>(n.nodes));
      for (std::size_t i = 0; i < n.nodes; ++i) {
        for (std::size_t k = 0; k < n.nodes; ++k) {
          a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = n.a[i][k];
        }
      }
      try {
        validate_coupling_matrix(a);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("system.a", e.what());
      }
      const std::size_t dim = n.nodes * n.node_dim;
      require(n.response_initial.size() == dim, "system.response_initial", "must have N*n entries");
      if (n.mode == SyncMode::Outer) {
        require(n.drive_initial.size() == dim, "system.drive_initial", "must have N*n entries");
      } else {
        require(n.reference_initial.size() == n.node_dim, "system.reference_initial",
                "must have n entries");
      }
    }
    if (root.has("gains")) {
      detail::ObjectReader r(root.raw("gains"), "gains");
      n.control = r.choice<NetworkControlKind>("control", n.control,
                                               {{"none", NetworkControlKind::None},
                                                {"pinning", NetworkControlKind::Pinning},
                                                {"full_node", NetworkControlKind::FullNode}});
      n.sigma = r.number("sigma", n.sigma);
      n.theta3 = r.number("theta3", n.theta3);
      n.theta4 = r.number("theta4", n.theta4);
      require(n.sigma > 0.0, "gains.sigma", "must be > 0");
      require(n.theta3 >= 0.0, "gains.theta3", "must be >= 0");
      require(n.theta4 >= 0.0, "gains.theta4", "must be >= 0");
      r.finish();
    }
    if (root.has("adaptive")) {
      detail::ObjectReader r(root.raw("adaptive"), "adaptive");
      NetworkAdaptive a;
      a.variant = r.choice<NetworkAdaptVariant>(
          "variant", a.variant,
          {{"theta3_theta4", NetworkAdaptVariant::Theta3Theta4},
           {"theta1_theta3", NetworkAdaptVariant::Theta1Theta3}});
      a.rates = detail::read_rates(r, a.rates);
      r.finish();
      const auto need = a.variant == NetworkAdaptVariant::Theta3Theta4
                            ? NetworkControlKind::FullNode
                            : NetworkControlKind::Pinning;
      require(n.control == need, "adaptive.variant",
              std::string("requires gains.control = ") + detail::kind_name(need));
      n.adaptive = a;
    }
  }

  if (root.has("delay")) {
    auto& d = c.delay;
    detail::ObjectReader r(root.raw("delay"), "delay");
    d.kind = r.string("kind", d.kind);
    if (d.kind == "proportional") {
      d.q = r.number("q", d.q);
      d.components = r.count("components", 1);
      require(d.q > 0.0 && d.q < 1.0, "delay.q", "must lie in (0, 1)");
    } else if (d.kind == "constant") {
      d.value = r.number("value", d.value);
      d.components = r.count("components", 1);
      require(d.value >= 0.0, "delay.value", "must be >= 0");
    } else if (d.kind == "per_component_sin") {
      d.scale = r.number("scale", d.scale);
      d.amplitude = r.number("amplitude", d.amplitude);
      require(d.scale > 0.0 && d.scale < 1.0, "delay.scale", "must lie in (0, 1)");
      require(d.amplitude >= 0.0 && d.amplitude <= 1.0, "delay.amplitude", "must lie in [0, 1]");
    } else if (d.kind == "custom_grid") {
      d.times = r.vector("times", {});
      d.values = r.matrix("values", {});
      try {
        (void)DelayProfile::custom_grid(d.times, d.values);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("delay", e.what());
      }
    } else {
      throw ConfigError("delay.kind", "unknown delay kind '" + d.kind + "'");
    }
    require(d.components >= 1, "delay.components", "must be >= 1");
    r.finish();
  }

  if (root.has("rate")) {
    detail::ObjectReader r(root.raw("rate"), "rate");
    c.rate.kind = r.string("kind", c.rate.kind);
    if (c.rate.kind == "power") {
      c.rate.parameter = r.number("exponent", c.rate.parameter);
      require(c.rate.parameter > 0.0, "rate.exponent", "must be > 0");
    } else if (c.rate.kind == "exponential") {
      c.rate.parameter = r.number("rate", c.rate.parameter);
      require(c.rate.parameter > 0.0, "rate.rate", "must be > 0");
    } else {
      throw ConfigError("rate.kind", "unknown rate kind '" + c.rate.kind + "'");
    }
    r.finish();
  }

  if (root.has("integrator")) {
    auto& in = c.integrator;
    detail::ObjectReader r(root.raw("integrator"), "integrator");
    in.t0 = r.number("t0", in.t0);
    in.h = r.number("h", in.h);
    in.horizon = r.number("horizon", in.horizon);
    in.method = r.choice<Method>("method", in.method,
                                 {{"euler", Method::Euler},
                                  {"rk4_frozen_delay", Method::Rk4FrozenDelay}});
    in.zero_band = r.optional_number("zero_band");
    in.zero_tol = r.number("zero_tol", in.zero_tol);
    in.constant_prehistory = r.boolean("constant_prehistory", in.constant_prehistory);
    r.finish();
    require(in.h > 0.0, "integrator.h", "must be > 0");
    require(in.horizon > in.t0, "integrator.horizon", "must exceed t0");
    require(!in.zero_band || *in.zero_band >= 0.0, "integrator.zero_band", "must be >= 0");
    require(in.zero_tol > 0.0, "integrator.zero_tol", "must be > 0");
  }

  if (root.has("monitor")) {
    auto& m = c.monitor;
    detail::ObjectReader r(root.raw("monitor"), "monitor");
    m.norm = r.choice<Norm>("norm", m.norm,
                            {{"two", Norm::Two}, {"one", Norm::One}, {"inf", Norm::Inf}});
    m.kappa = r.number("kappa", m.kappa);
    if (auto eps1 = r.optional_number("eps1")) m.eps1 = eps1;
    m.start_time = r.optional_number("start_time");
    m.deriv_tol = r.number("deriv_tol", m.deriv_tol);
    m.guarantee = r.boolean("guarantee", m.guarantee);
    r.finish();
    require(m.kappa > 0.0 && m.kappa <= 1.0, "monitor.kappa", "must lie in (0, 1]");
    require(!m.eps1 || *m.eps1 > 0.0, "monitor.eps1", "must be > 0");
    require(m.deriv_tol >= 0.0, "monitor.deriv_tol", "must be >= 0");
  }

  if (root.has("output")) {
    auto& o = c.output;
    detail::ObjectReader r(root.raw("output"), "output");
    o.directory = r.string("directory", o.directory);
    o.prefix = r.string("prefix", o.prefix);
    o.stride = r.count("stride", o.stride);
    r.finish();
    require(o.stride >= 1, "output.stride", "must be >= 1");
  }
  root.finish();
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

/// Full serialization: every field is written, so parse(to_json(c)) == c.
inline json to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["kind"] = c.kind == ExperimentKind::Scalar ? "scalar" : "network";
  if (c.kind == ExperimentKind::Scalar) {
    const auto& s = c.scalar;
    j["system"] = {{"c1", s.c1}, {"c2", s.c2}, {"initial", s.initial}};
    j["gains"] = {{"c3", s.c3}, {"c4", s.c4}};
    if (s.adaptive) {
      j["adaptive"] = {{"d1", s.adaptive->d1}, {"d2", s.adaptive->d2}, {"d3", s.adaptive->d3}};
    }
  } else {
    const auto& n = c.network;
    json sys;
    sys["nodes"] = n.nodes;
    sys["node_dim"] = n.node_dim;
    sys["f"] = n.f;
    sys["g"] = n.g;
    sys["a"] = detail::matrix_json(n.a);
    sys["b"] = detail::matrix_json(n.b);
    sys["theta1"] = n.theta1;
    sys["theta2"] = n.theta2;
    if (n.lipschitz_f) sys["lipschitz_f"] = *n.lipschitz_f;
    if (n.lipschitz_g) sys["lipschitz_g"] = *n.lipschitz_g;
    sys["mode"] = n.mode == SyncMode::Outer ? "outer" : "inner";
    sys["drive_initial"] = n.drive_initial;
    sys["response_initial"] = n.response_initial;
    sys["reference_initial"] = n.reference_initial;
    j["system"] = sys;
    j["gains"] = {{"control", detail::kind_name(n.control)},
                  {"sigma", n.sigma},
                  {"theta3", n.theta3},
                  {"theta4", n.theta4}};
    if (n.adaptive) {
      j["adaptive"] = {{"variant", n.adaptive->variant == NetworkAdaptVariant::Theta3Theta4
                                       ? "theta3_theta4"
                                       : "theta1_theta3"},
                       {"d1", n.adaptive->rates.d1},
                       {"d2", n.adaptive->rates.d2},
                       {"d3", n.adaptive->rates.d3}};
    }
  }
  const auto& d = c.delay;
  json dj{{"kind", d.kind}};
  if (d.kind == "proportional") {
    dj["q"] = d.q;
    dj["components"] = d.components;
  } else if (d.kind == "constant") {
    dj["value"] = d.value;
    dj["components"] = d.components;
  } else if (d.kind == "per_component_sin") {
    dj["scale"] = d.scale;
    dj["amplitude"] = d.amplitude;
  } else {
    dj["times"] = d.times;
    dj["values"] = detail::matrix_json(d.values);
  }
  j["delay"] = dj;
  j["rate"] = {{"kind", c.rate.kind}, {c.rate.kind == "power" ? "exponent" : "rate", c.rate.parameter}};
  const auto& in = c.integrator;
  json ij{{"t0", in.t0}, {"h", in.h}, {"horizon", in.horizon}, {"method", to_string(in.method)}};
  if (in.zero_band) ij["zero_band"] = *in.zero_band;
  ij["zero_tol"] = in.zero_tol;
  ij["constant_prehistory"] = in.constant_prehistory;
  j["integrator"] = ij;
  json mj{{"norm", to_string(c.monitor.norm)}, {"kappa", c.monitor.kappa}};
  if (c.monitor.eps1) mj["eps1"] = *c.monitor.eps1;
  if (c.monitor.start_time) mj["start_time"] = *c.monitor.start_time;
  mj["deriv_tol"] = c.monitor.deriv_tol;
  mj["guarantee"] = c.monitor.guarantee;
  j["monitor"] = mj;
  j["output"] = {{"directory", c.output.directory},
                 {"prefix", c.output.prefix},
                 {"stride", c.output.stride}};
  return j;
}

inline DelayProfile build_delay(const ExperimentConfig& c) {
  const auto& d = c.delay;
  if (d.kind == "proportional") return DelayProfile::proportional(d.q, d.components);
  if (d.kind == "constant") return DelayProfile::constant(d.value, d.components);
  if (d.kind == "per_component_sin") {
    const std::size_t nodes = c.kind == ExperimentKind::Network ? c.network.nodes : 1;
    return DelayProfile::per_component_sin(nodes, d.scale, d.amplitude);
  }
  if (d.kind == "custom_grid") return DelayProfile::custom_grid(d.times, d.values);
  throw ConfigError("delay.kind", "unknown delay kind '" + d.kind + "'");
}

inline RateFunction build_rate(const ExperimentConfig& c) {
  return c.rate.kind == "power" ? RateFunction::power(c.rate.parameter)
                                : RateFunction::exponential(c.rate.parameter);
}

inline ScalarExperiment build_scalar(const ExperimentConfig& c) {
  if (c.kind != ExperimentKind::Scalar) throw ConfigError("kind", "expected a scalar experiment");
  ScalarExperiment e;
  const auto& s = c.scalar;
  e.gains = {s.c1, s.c2, s.c3, s.c4};
  e.initial = s.initial;
  e.delay = build_delay(c);
  if (e.delay.component_count() != 1 && e.delay.component_count() != s.initial.size()) {
    throw ConfigError("delay.components", "must be 1 or the state dimension");
  }
  e.rate = build_rate(c);
  e.integrator = c.integrator;
  e.norm = c.monitor.norm;
  e.adaptive = s.adaptive;
  e.eps1 = c.monitor.eps1;
  e.kappa = c.monitor.kappa;
  e.monitor_start = c.monitor.start_time;
  if (s.adaptive) e.gains.c3 = e.gains.c4 = 0.0;
  try {
    e.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("delay", ex.what());
  }
  return e;
}

inline SyncExperiment build_network(const ExperimentConfig& c) {
  if (c.kind != ExperimentKind::Network) throw ConfigError("kind", "expected a network experiment");
  const auto& n = c.network;
  SyncExperiment e;
  auto& m = e.model;
  m.nodes = n.nodes;
  m.node_dim = n.node_dim;
  const auto nn = static_cast<Eigen::Index>(n.nodes);
  m.a.resize(nn, nn);
  m.b.resize(nn, nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index k = 0; k < nn; ++k) {
      m.a(i, k) = n.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      m.b(i, k) = n.b[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
  }
  m.theta1 = n.theta1;
  m.theta2 = n.theta2;
  m.f = lorenz;
  m.g = sin_plus_linear;
  m.lipschitz_f = n.lipschitz_f.value_or(lorenz_lipschitz_on_box(kLorenzBoxLower, kLorenzBoxUpper));
  m.lipschitz_g = n.lipschitz_g.value_or(3.0);
  m.delays = build_delay(c);
  if (m.delays.component_count() != 1 && m.delays.component_count() != n.nodes * n.nodes) {
    throw ConfigError("delay.components", "must be 1 or N^2 for a network");
  }
  e.mode = n.mode;
  e.drive_initial = n.drive_initial;
  e.response_initial = n.response_initial;
  e.reference_initial = n.reference_initial;
  e.control.kind = n.control;
  e.control.sigma = n.sigma;
  e.control.theta3 = n.theta3;
  e.control.theta4 = n.theta4;
  e.control.adaptive = n.adaptive;
  e.integrator = c.integrator;
  e.rate = build_rate(c);
  return e;
}

}  // namespace ftd

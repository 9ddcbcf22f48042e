#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "awpi/scenario_io.hpp"

namespace awpi {

using nlohmann::json;

ScenarioError::ScenarioError(const std::string& source, std::optional<int> line, const std::string& message)
    : std::runtime_error(line ? fmt::format("{}:{}: {}", source, *line, message)
                              : fmt::format("{}: {}", source, message)),
      source_(source),
      line_(line) {}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const auto mark = at.Mark();
    std::optional<int> line;
    if (mark.line >= 0) line = mark.line + 1;
    throw ScenarioError(source_, line, msg);
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ScenarioError(source_, std::nullopt, msg); }

  void require_map(const YAML::Node& n, std::string_view where) const {
    if (!n.IsMap()) fail(n, fmt::format("'{}' must be a mapping", where));
  }

  void check_keys(const YAML::Node& n, std::string_view where, std::initializer_list<std::string_view> allowed) const {
    require_map(n, where);
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(kv.first, fmt::format("unknown key '{}' in '{}'", key, where));
      }
    }
  }

  template <class T>
  T get(const YAML::Node& n, const char* key, std::string_view where) const {
    const YAML::Node v = n[key];
    if (!v) fail(n, fmt::format("missing required key '{}' in '{}'", key, where));
    return as<T>(v, key);
  }

  template <class T>
  T get_or(const YAML::Node& n, const char* key, T fallback) const {
    const YAML::Node v = n[key];
    if (!v) return fallback;
    return as<T>(v, key);
  }

  template <class T>
  T as(const YAML::Node& v, std::string_view key) const {
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      fail(v, fmt::format("key '{}' has the wrong type", key));
    }
  }

 private:
  std::string source_;
};

SignalSpec read_signal(const Reader& rd, const YAML::Node& n) {
  rd.require_map(n, "signal");
  const auto kind = rd.get<std::string>(n, "kind", "signal");
  try {
    if (kind == "constant") {
      rd.check_keys(n, "signal", {"kind", "value"});
      return SignalSpec{ConstantSignal{rd.get<double>(n, "value", "signal")}};
    }
    if (kind == "triangular-ramp") {
      rd.check_keys(n, "signal", {"kind", "u0", "t_down", "t_up", "slope"});
      return SignalSpec{TriangularRamp{rd.get<double>(n, "u0", "signal"), rd.get<double>(n, "t_down", "signal"),
                                       rd.get<double>(n, "t_up", "signal"), rd.get<double>(n, "slope", "signal")}};
    }
    if (kind == "piecewise-linear") {
      rd.check_keys(n, "signal", {"kind", "points"});
      const YAML::Node pts = n["points"];
      if (!pts || !pts.IsSequence()) rd.fail(n, "'signal.points' must be a sequence of [t, u] pairs");
      PiecewiseLinear pl;
      for (const auto& p : pts) {
        if (!p.IsSequence() || p.size() != 2) rd.fail(p, "each breakpoint must be a [t, u] pair");
        pl.points.emplace_back(rd.as<double>(p[0], "points"), rd.as<double>(p[1], "points"));
      }
      return SignalSpec{std::move(pl)};
    }
  } catch (const std::invalid_argument& e) {
    rd.fail(n, fmt::format("invalid signal: {}", e.what()));
  }
  rd.fail(n["kind"], fmt::format("unknown signal kind '{}' (expected constant, triangular-ramp, piecewise-linear)",
                                 kind));
}

ScenarioConfig read_config(const Reader& rd, const YAML::Node& root) {
  rd.check_keys(root, "scenario",
                {"name", "method", "params", "signal", "initial_output", "time", "itm", "max_stalled_attempts",
                 "keep_all_traces", "analysis"});

  const YAML::Node p = root["params"];
  if (!p) rd.fail(root, "missing required key 'params'");
  rd.check_keys(p, "params", {"kp", "ki", "w_min", "w_max"});
  std::optional<PiParams> params;
  try {
    params.emplace(rd.get<double>(p, "kp", "params"), rd.get<double>(p, "ki", "params"),
                   rd.get<double>(p, "w_min", "params"), rd.get<double>(p, "w_max", "params"));
  } catch (const std::invalid_argument& e) {
    rd.fail(p, fmt::format("invalid params: {}", e.what()));
  }

  const YAML::Node s = root["signal"];
  if (!s) rd.fail(root, "missing required key 'signal'");

  ScenarioConfig cfg{.name = rd.get_or<std::string>(root, "name", ""),
                     .params = *params,
                     .signal = read_signal(rd, s)};

  const auto method = rd.get<std::string>(root, "method", "scenario");
  try {
    cfg.method = method_from_string(method);
  } catch (const std::invalid_argument& e) {
    rd.fail(root["method"], e.what());
  }
  cfg.initial_output = rd.get<double>(root, "initial_output", "scenario");

  const YAML::Node t = root["time"];
  if (!t) rd.fail(root, "missing required key 'time'");
  rd.check_keys(t, "time", {"t_start", "t_end", "h"});
  cfg.t_start = rd.get_or<double>(t, "t_start", 0.0);
  cfg.t_end = rd.get<double>(t, "t_end", "time");
  cfg.h = rd.get_or<double>(t, "h", cfg.h);

  if (const YAML::Node itm = root["itm"]) {
    rd.check_keys(itm, "itm", {"epsilon", "n_iter_max", "h_init", "h_min_floor", "h_cap", "h_delta"});
    cfg.itm.epsilon = rd.get_or<double>(itm, "epsilon", cfg.itm.epsilon);
    cfg.itm.n_iter_max = rd.get_or<int>(itm, "n_iter_max", cfg.itm.n_iter_max);
    cfg.itm.h_init = rd.get_or<double>(itm, "h_init", cfg.itm.h_init);
    cfg.itm.h_min_floor = rd.get_or<double>(itm, "h_min_floor", cfg.itm.h_min_floor);
    cfg.itm.h_cap = rd.get_or<double>(itm, "h_cap", cfg.itm.h_cap);
    cfg.itm.h_delta = rd.get_or<double>(itm, "h_delta", cfg.itm.h_delta);
  }
  cfg.max_stalled_attempts = rd.get_or<int>(root, "max_stalled_attempts", cfg.max_stalled_attempts);
  cfg.keep_all_traces = rd.get_or<bool>(root, "keep_all_traces", cfg.keep_all_traces);

  if (const YAML::Node a = root["analysis"]) {
    rd.check_keys(a, "analysis", {"k_max", "t_ref"});
    cfg.analysis.k_max = rd.get_or<int>(a, "k_max", cfg.analysis.k_max);
    if (a["t_ref"]) cfg.analysis.t_ref = rd.as<double>(a["t_ref"], "t_ref");
  }

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    rd.fail(e.what());
  }
  return cfg;
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

json limiter_json(LimiterState s) { return std::string(to_string(s.status())); }

}  // namespace

ScenarioConfig parse_scenario(std::string_view text, std::string_view source) {
  const Reader rd{std::string(source)};
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(std::string(source), e.mark.line >= 0 ? std::optional<int>(e.mark.line + 1) : std::nullopt,
                        fmt::format("parse error: {}", e.msg));
  }
  if (!root || root.IsNull()) rd.fail("parse error: scenario is empty");
  if (!root.IsMap()) rd.fail(root, "parse error: top level must be a mapping");
  return read_config(rd, root);
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path.string(), std::nullopt, "cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.string());
}

std::string to_yaml(const ScenarioConfig& c) {
  std::string out;
  auto line = [&out](std::string s) {
    out += s;
    out += '\n';
  };
  if (!c.name.empty()) line(fmt::format("name: {}", c.name));
  line(fmt::format("method: {}", to_string(c.method)));
  line("params:");
  line(fmt::format("  kp: {}", fmt_double(c.params.kp())));
  line(fmt::format("  ki: {}", fmt_double(c.params.ki())));
  line(fmt::format("  w_min: {}", fmt_double(c.params.w_min())));
  line(fmt::format("  w_max: {}", fmt_double(c.params.w_max())));
  line("signal:");
  line(fmt::format("  kind: {}", c.signal.kind()));
  std::visit(
      [&line](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantSignal>) {
          line(fmt::format("  value: {}", fmt_double(s.value)));
        } else if constexpr (std::is_same_v<T, TriangularRamp>) {
          line(fmt::format("  u0: {}", fmt_double(s.u0)));
          line(fmt::format("  t_down: {}", fmt_double(s.t_down)));
          line(fmt::format("  t_up: {}", fmt_double(s.t_up)));
          line(fmt::format("  slope: {}", fmt_double(s.slope)));
        } else {
          line("  points:");
          for (const auto& [t, u] : s.points) line(fmt::format("    - [{}, {}]", fmt_double(t), fmt_double(u)));
        }
      },
      c.signal.get());
  line(fmt::format("initial_output: {}", fmt_double(c.initial_output)));
  line("time:");
  line(fmt::format("  t_start: {}", fmt_double(c.t_start)));
  line(fmt::format("  t_end: {}", fmt_double(c.t_end)));
  line(fmt::format("  h: {}", fmt_double(c.h)));
  line("itm:");
  line(fmt::format("  epsilon: {}", fmt_double(c.itm.epsilon)));
  line(fmt::format("  n_iter_max: {}", c.itm.n_iter_max));
  line(fmt::format("  h_init: {}", fmt_double(c.itm.h_init)));
  line(fmt::format("  h_min_floor: {}", fmt_double(c.itm.h_min_floor)));
  line(fmt::format("  h_cap: {}", fmt_double(c.itm.h_cap)));
  line(fmt::format("  h_delta: {}", fmt_double(c.itm.h_delta)));
  line(fmt::format("max_stalled_attempts: {}", c.max_stalled_attempts));
  line(fmt::format("keep_all_traces: {}", c.keep_all_traces));
  line("analysis:");
  line(fmt::format("  k_max: {}", c.analysis.k_max));
  if (c.analysis.t_ref) line(fmt::format("  t_ref: {}", fmt_double(*c.analysis.t_ref)));
  return out;
}

void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << to_yaml(config);
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

namespace {

std::optional<double> find_unlock_time(const ScenarioConfig& cfg) {
  EventLog log;
  try {
    log = simulate(cfg);
  } catch (const SimulationAborted& e) {
    log = e.partial_log();
  }
  for (const auto& r : log.records) {
    if (!r.limiter_before.limited()) continue;
    if (derivative(cfg.signal, r.t_start) >= 0.0) continue;
    const bool left_limit =
        !r.converged() || r.limiter_after != r.limiter_before ||
        (!r.iteration_trace.empty() && r.iteration_trace.front().status_in != r.limiter_before);
    if (left_limit) return r.t;
  }
  return std::nullopt;
}

json chatter_json(const ChatterPrediction& p) {
  json per_k = json::array();
  for (const auto& [k, b] : p.per_k_thresholds) per_k.push_back({{"k", k}, {"bound", b}});
  json j = {{"method", std::string(to_string(p.method))},
            {"reading", p.reading == SummandReading::cumulative ? "cumulative" : "literal"},
            {"k_max", p.k_max},
            {"threshold_u", p.threshold_u},
            {"binding_k", p.binding_k},
            {"per_k", per_k}};
  if (p.stays_unlocked_at_ref) j["stays_unlocked_at_ref"] = *p.stays_unlocked_at_ref;
  return j;
}

json header_json(const ScenarioConfig& c) {
  return {{"scenario", c.name},
          {"method", std::string(to_string(c.method))},
          {"kp", c.params.kp()},
          {"ki", c.params.ki()},
          {"w_min", c.params.w_min()},
          {"w_max", c.params.w_max()},
          {"initial_output", c.initial_output}};
}

void emit(std::ostream& out, json j) {
  json rec = {{"schema_version", kReportSchemaVersion}};
  rec.update(j);
  out << rec.dump() << '\n';
}

}  // namespace

ScenarioPredictions predict(const ScenarioConfig& config, std::optional<int> k_max) {
  ScenarioPredictions p;
  p.h = config.nominal_step();
  p.epsilon = config.itm.epsilon;
  const auto t_ref = config.analysis.t_ref ? config.analysis.t_ref : find_unlock_time(config);
  if (!t_ref) {
    throw std::invalid_argument("predict: no unlock on a falling input found; set analysis.t_ref in the scenario");
  }
  p.t_ref = *t_ref;
  p.u_ref = sample(config.signal, p.t_ref);
  p.udot_ref = derivative(config.signal, p.t_ref);
  if (!(p.udot_ref < 0.0)) {
    throw std::invalid_argument(fmt::format("predict: input is not falling at t_ref = {}", p.t_ref));
  }
  p.du_per_step = p.udot_ref * p.h;
  const int k = k_max.value_or(config.analysis.k_max);
  p.epm = chattering_threshold_epm(config.params, p.h, p.du_per_step, p.u_ref, k);
  p.elm = chattering_threshold_elm(config.params, p.h, p.du_per_step, p.u_ref, k);
  if (p.u_ref > 0.0) p.deadlock = deadlock_bounds(config.params, p.u_ref, p.udot_ref, p.h, p.epsilon);
  return p;
}

void write_predictions(const ScenarioConfig& config, const ScenarioPredictions& p, std::ostream& out,
                       OutputFormat format) {
  if (format == OutputFormat::json_lines) {
    json run = header_json(config);
    run["record"] = "prediction_inputs";
    run.update({{"h", p.h}, {"t_ref", p.t_ref}, {"u_ref", p.u_ref}, {"udot_ref", p.udot_ref},
                {"du_per_step", p.du_per_step}, {"epsilon", p.epsilon}});
    emit(out, run);
    for (const auto* c : {&p.epm, &p.elm}) {
      json j = chatter_json(*c);
      j["record"] = "chatter_prediction";
      emit(out, j);
    }
    if (p.deadlock) {
      emit(out, {{"record", "deadlock_bounds"},
                 {"h_min_avoid", p.deadlock->h_min_avoid},
                 {"h_max_exit", p.deadlock->h_max_exit},
                 {"h_avoid_discrete", p.deadlock->h_avoid_discrete}});
    }
    return;
  }

  fmt::print(out, "scenario,{}\n", config.name);
  fmt::print(out, "kp,{:.12g}\nki,{:.12g}\nw_min,{:.12g}\nw_max,{:.12g}\n", config.params.kp(), config.params.ki(),
             config.params.w_min(), config.params.w_max());
  fmt::print(out, "h,{:.12g}\nt_ref,{:.12g}\nu_ref,{:.12g}\ndu_per_step,{:.12g}\nepsilon,{:.12g}\n", p.h, p.t_ref,
             p.u_ref, p.du_per_step, p.epsilon);
  for (const auto* c : {&p.epm, &p.elm}) {
    fmt::print(out, "{}_threshold_u,{:.12g}\n{}_binding_k,{}\n", to_string(c->method), c->threshold_u,
               to_string(c->method), c->binding_k);
  }
  if (p.deadlock) {
    fmt::print(out, "h_min_avoid,{:.12g}\nh_max_exit,{:.12g}\nh_avoid_discrete,{:.12g}\n", p.deadlock->h_min_avoid,
               p.deadlock->h_max_exit, p.deadlock->h_avoid_discrete);
  }
}

void write_report(const ScenarioConfig& config, const EventLog& log, std::ostream& out) {
  json run = header_json(config);
  run["record"] = "run";
  const auto accepted = log.accepted();
  run["steps"] = accepted.size();
  run["attempts"] = log.records.size();
  run["t_end"] = accepted.empty() ? log.initial.t : accepted.back()->t;
  emit(out, run);

  for (const auto& ev : limiter_events(log)) {
    emit(out, {{"record", "limiter_transition"},
               {"t", ev.t},
               {"u", ev.u},
               {"from", limiter_json(ev.from)},
               {"to", limiter_json(ev.to)}});
  }
  for (const auto& ep : detect_deadlock(log)) {
    emit(out, {{"record", "deadlock_episode"},
               {"t_start", ep.t_start},
               {"t", ep.t},
               {"u", ep.u},
               {"attempts", ep.attempts},
               {"first_h", ep.first_h},
               {"exit_h", ep.exit_h},
               {"exit_u", ep.exit_u},
               {"exit_kind", std::string(to_string(ep.exit_kind))}});
  }
  if (log.method != Method::itm) {
    for (const auto& iv : detect_chattering(log)) {
      emit(out, {{"record", "chattering_interval"},
                 {"t_begin", iv.t_begin},
                 {"t_end", iv.t_end},
                 {"u_begin", iv.u_begin},
                 {"u_end", iv.u_end},
                 {"toggles", iv.toggles}});
    }
  }
  const ChatterStop stop = summarize_chatter_stop(log);
  json s = {{"record", "chatter_stop"}, {"relocks", stop.relocks}};
  s["last_relock_u"] = stop.last_relock_u ? json(*stop.last_relock_u) : json(nullptr);
  s["last_failed_unlock_u"] = stop.last_failed_unlock_u ? json(*stop.last_failed_unlock_u) : json(nullptr);
  s["final_unlock_u"] = stop.final_unlock_u ? json(*stop.final_unlock_u) : json(nullptr);
  emit(out, s);
}

}  // namespace awpi

#include "mimocov/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "mimocov/errors.hpp"
#include "mimocov/io.hpp"

namespace mimocov {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
  }
}

double number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number");
  return obj[key].get<double>();
}

std::size_t count(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_unsigned()) throw ConfigError(std::string("\"") + key + "\" must be a non-negative integer");
  return obj[key].get<std::size_t>();
}

std::string type_of(const json& obj, const std::string& where) {
  if (!obj.contains("type") || !obj["type"].is_string()) throw ConfigError(where + ": missing \"type\"");
  return obj["type"].get<std::string>();
}

std::vector<ComplexMatrix> matrices(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ConfigError(where + ": expected an array of matrices");
  std::vector<ComplexMatrix> out;
  for (const auto& m : arr) out.push_back(matrix_from_json(m));
  return out;
}

ChannelModel parse_channel(const json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "paper-two-state") return presets::two_state();
    if (name == "paper-continuous") return presets::continuous_product();
    throw ConfigError("channel: unknown preset \"" + name + "\"");
  }
  const auto type = type_of(j, "channel");
  if (type == "discrete") {
    check_keys(j, {"type", "states", "probs"}, "channel");
    DiscreteChannel d;
    d.states = matrices(j.at("states"), "channel.states");
    d.probs = j.at("probs").get<std::vector<double>>();
    return d;
  }
  if (type == "product") {
    check_keys(j, {"type", "n_r", "n_t", "v_max"}, "channel");
    return ProductChannel{count(j, "n_r", 2), count(j, "n_t", 2), number(j, "v_max", 0.5)};
  }
  throw ConfigError("channel: unknown type \"" + type + "\"");
}

CsitErrorModel parse_csit(const json& j, const ChannelModel& channel) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "exact") return ExactCsit{};
    if (name == "two-state-phase") return presets::phase_csit_table();
    if (name == "two-state-mag-phase") return presets::mag_phase_csit_table();
    throw ConfigError("csit: unknown preset \"" + name + "\"");
  }
  const auto type = type_of(j, "csit");
  if (type == "exact") {
    check_keys(j, {"type"}, "csit");
    return ExactCsit{};
  }
  if (type == "phase-quantize") {
    check_keys(j, {"type", "step"}, "csit");
    return PhaseQuantize{number(j, "step", 0.0)};
  }
  if (type == "mag-phase-quantize") {
    check_keys(j, {"type", "mag_step", "phase_step"}, "csit");
    return MagPhaseQuantize{number(j, "mag_step", 0.0), number(j, "phase_step", 0.0)};
  }
  if (type == "bounded-ball") {
    check_keys(j, {"type", "delta"}, "csit");
    return BoundedBall{number(j, "delta", 0.0)};
  }
  if (type == "table") {
    check_keys(j, {"type", "observed"}, "csit");
    const auto* d = std::get_if<DiscreteChannel>(&channel);
    if (d == nullptr) throw ConfigError("csit table needs a discrete channel");
    return CsitTable{d->states, matrices(j.at("observed"), "csit.observed")};
  }
  throw ConfigError("csit: unknown type \"" + type + "\"");
}

ControllerSpec parse_controller(const json& j) {
  const auto type = type_of(j, "controller");
  if (type == "dpp") {
    check_keys(j, {"type", "v", "z0"}, "controller");
    return DppSpec{number(j, "v", 100.0), number(j, "z0", 0.0)};
  }
  if (type == "ogd") {
    check_keys(j, {"type", "gamma", "step", "t_delay"}, "controller");
    OgdSpec spec;
    if (j.contains("step")) {
      if (j.contains("gamma")) throw ConfigError("controller: give either \"gamma\" or \"step\", not both");
      if (j["step"] != "inverse-sqrt") throw ConfigError("controller: \"step\" must be \"inverse-sqrt\"");
      spec.step = InverseSqrtStep{};
    } else {
      spec.step = ConstantStep{number(j, "gamma", 0.01)};
    }
    spec.t_delay = count(j, "t_delay", 0);  // 0: take it from the delay model
    return spec;
  }
  if (type == "baseline") {
    check_keys(j, {"type", "policy", "policy_file", "n_samples"}, "controller");
    BaselineSpec spec;
    spec.kind = parse_baseline_kind(j.value("policy", std::string("cdi-optimal")));
    if (j.contains("policy_file")) spec.policy_file = j["policy_file"].get<std::string>();
    spec.n_samples = count(j, "n_samples", 100);
    return spec;
  }
  throw ConfigError("controller: unknown type \"" + type + "\"");
}

DelayModel parse_delay(const json& j) {
  if (j.is_string()) {
    if (j == "instantaneous") return Instantaneous{};
    throw ConfigError("delay: unknown preset " + j.dump());
  }
  const auto type = type_of(j, "delay");
  if (type == "instantaneous") {
    check_keys(j, {"type"}, "delay");
    return Instantaneous{};
  }
  if (type == "delayed") {
    check_keys(j, {"type", "t_slots"}, "delay");
    return Delayed{count(j, "t_slots", 1)};
  }
  throw ConfigError("delay: unknown type \"" + type + "\"");
}

}  // namespace

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kCdiOptimal:
      return "cdi-optimal";
    case BaselineKind::kErgodicConstant:
      return "ergodic-constant";
    case BaselineKind::kEmpiricalCsit:
      return "empirical-csit";
    case BaselineKind::kEmpiricalNoCsit:
      return "empirical-no-csit";
  }
  return "unknown";
}

BaselineKind parse_baseline_kind(const std::string& name) {
  for (auto k : {BaselineKind::kCdiOptimal, BaselineKind::kErgodicConstant, BaselineKind::kEmpiricalCsit,
                 BaselineKind::kEmpiricalNoCsit}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown baseline policy \"" + name + "\"");
}

std::string controller_label(const ControllerSpec& spec) {
  std::ostringstream os;
  if (const auto* d = std::get_if<DppSpec>(&spec)) {
    os << "dpp(v=" << format_double(d->v);
    if (d->z0 != 0.0) os << ",z0=" << format_double(d->z0);
    os << ")";
  } else if (const auto* o = std::get_if<OgdSpec>(&spec)) {
    os << "ogd(";
    if (const auto* c = std::get_if<ConstantStep>(&o->step)) {
      os << "gamma=" << format_double(c->gamma);
    } else {
      os << "inverse-sqrt";
    }
    os << ",T=" << o->t_delay << ")";
  } else {
    os << "baseline(" << to_string(std::get<BaselineSpec>(spec).kind) << ")";
  }
  return os.str();
}

void validate(const ExperimentConfig& cfg) {
  try {
    validate(cfg.channel);
    validate(cfg.csit);
    validate(cfg.delay);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.p_bar > 0.0) || !(cfg.p >= cfg.p_bar)) throw ConfigError("need p >= p_bar > 0");
  if (cfg.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (const auto* t = std::get_if<CsitTable>(&cfg.csit)) {
    const auto* d = std::get_if<DiscreteChannel>(&cfg.channel);
    if (d == nullptr) throw ConfigError("csit table needs a discrete channel");
    if (t->truth != d->states) throw ConfigError("csit table states do not match the channel states");
  }

  const auto* delayed = std::get_if<Delayed>(&cfg.delay);
  if (const auto* d = std::get_if<DppSpec>(&cfg.controller)) {
    if (!(d->v > 0.0)) throw ConfigError("dpp: v must be > 0");
    if (!(d->z0 >= 0.0)) throw ConfigError("dpp: z0 must be >= 0");
    if (delayed) throw ConfigError("dpp needs instantaneous CSIT");
  } else if (const auto* o = std::get_if<OgdSpec>(&cfg.controller)) {
    if (const auto* c = std::get_if<ConstantStep>(&o->step); c && !(c->gamma > 0.0)) {
      throw ConfigError("ogd: gamma must be > 0");
    }
    if (!delayed) throw ConfigError("ogd needs delayed CSIT");
    if (o->t_delay != delayed->t_slots) throw ConfigError("ogd: t_delay differs from the delay model");
  } else {
    const auto& b = std::get<BaselineSpec>(cfg.controller);
    if (delayed) throw ConfigError("baselines observe instantaneous CSIT");
    const bool needs_discrete = b.kind == BaselineKind::kCdiOptimal || b.kind == BaselineKind::kErgodicConstant;
    if (needs_discrete && !b.policy_file && !std::holds_alternative<DiscreteChannel>(cfg.channel)) {
      throw ConfigError("baseline " + to_string(b.kind) + " needs a discrete channel");
    }
    if (b.n_samples < 1) throw ConfigError("baseline: n_samples must be >= 1");
  }
  if (cfg.rate_adapt && !(cfg.rate_adapt->n_total > 0.0)) throw ConfigError("rate_adapt: n_total must be > 0");
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig cfg;
  try {
    check_keys(doc,
               {"name", "channel", "csit", "delay", "controller", "p", "p_bar", "horizon", "seed", "rate_adapt",
                "output"},
               "config");
    cfg.name = doc.value("name", cfg.name);
    if (doc.contains("channel")) cfg.channel = parse_channel(doc["channel"]);
    if (doc.contains("csit")) cfg.csit = parse_csit(doc["csit"], cfg.channel);
    if (doc.contains("controller")) cfg.controller = parse_controller(doc["controller"]);

    // The delay model follows the controller unless stated.
    std::optional<DelayModel> delay;
    if (doc.contains("delay")) delay = parse_delay(doc["delay"]);
    if (auto* o = std::get_if<OgdSpec>(&cfg.controller)) {
      if (o->t_delay == 0) {
        const auto* d = delay ? std::get_if<Delayed>(&*delay) : nullptr;
        o->t_delay = d ? d->t_slots : 1;
      }
      cfg.delay = delay.value_or(Delayed{o->t_delay});
    } else {
      cfg.delay = delay.value_or(Instantaneous{});
    }

    cfg.p = number(doc, "p", cfg.p);
    cfg.p_bar = number(doc, "p_bar", cfg.p_bar);
    cfg.horizon = count(doc, "horizon", cfg.horizon);
    if (doc.contains("seed")) {
      if (!doc["seed"].is_number_unsigned()) throw ConfigError("\"seed\" must be a non-negative integer");
      cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("rate_adapt")) {
      check_keys(doc["rate_adapt"], {"n_total"}, "rate_adapt");
      cfg.rate_adapt = RateAdaptSpec{number(doc["rate_adapt"], "n_total", 0.0)};
    }
    if (doc.contains("output")) {
      const auto& o = doc["output"];
      check_keys(o, {"csv", "summary", "svg", "policy"}, "output");
      if (o.contains("csv")) cfg.output.csv = o["csv"].get<std::string>();
      if (o.contains("summary")) cfg.output.summary = o["summary"].get<std::string>();
      if (o.contains("svg")) cfg.output.svg = o["svg"].get<std::string>();
      if (o.contains("policy")) cfg.output.policy = o["policy"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_json_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace mimocov

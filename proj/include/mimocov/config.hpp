#pragma once

// Experiment configuration (JSON) and the shipped presets.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "mimocov/channel.hpp"
#include "mimocov/controllers.hpp"

namespace mimocov {

struct DppSpec {
  double v = 100.0;
  double z0 = 0.0;
};

struct OgdSpec {
  StepPolicy step = ConstantStep{0.01};
  std::size_t t_delay = 1;
};

enum class BaselineKind { kCdiOptimal, kErgodicConstant, kEmpiricalCsit, kEmpiricalNoCsit };

struct BaselineSpec {
  BaselineKind kind = BaselineKind::kCdiOptimal;
  /// Load a stored policy instead of recomputing it.
  std::optional<std::filesystem::path> policy_file;
  std::size_t n_samples = 100;
};

using ControllerSpec = std::variant<DppSpec, OgdSpec, BaselineSpec>;

struct RateAdaptSpec {
  double n_total = 0.0;
};

struct OutputSpec {
  std::optional<std::filesystem::path> csv;
  std::optional<std::filesystem::path> summary;
  /// Prefix for `<prefix>_utility.svg` and `<prefix>_power.svg`.
  std::optional<std::filesystem::path> svg;
  /// Where `mimocov baseline` stores the policy.
  std::optional<std::filesystem::path> policy;
};

struct ExperimentConfig {
  std::string name = "run";
  ChannelModel channel = presets::two_state();
  CsitErrorModel csit = ExactCsit{};
  DelayModel delay = Instantaneous{};
  ControllerSpec controller = DppSpec{};
  double p = 3.0;
  double p_bar = 2.0;
  std::size_t horizon = 5000;
  std::uint64_t seed = 1;
  std::optional<RateAdaptSpec> rate_adapt;
  OutputSpec output;
};

std::string to_string(BaselineKind kind);
BaselineKind parse_baseline_kind(const std::string& name);

/// Short label such as "dpp(v=100)" or "ogd(inverse-sqrt,T=3)".
std::string controller_label(const ControllerSpec& spec);

/// Cross-field checks: p >= p_bar > 0, horizon >= 1, model invariants, and a
/// delay model consistent with the controller. Throws ConfigError.
void validate(const ExperimentConfig& cfg);

/// Parse a config document. Relative paths inside it are kept as written
/// (resolved against the working directory). Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace mimocov

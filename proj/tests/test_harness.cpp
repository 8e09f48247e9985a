#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mimocov/config.hpp"
#include "mimocov/errors.hpp"
#include "mimocov/harness.hpp"
#include "mimocov/io.hpp"

using namespace mimocov;
using nlohmann::json;

namespace {

ExperimentConfig dpp_config(std::size_t horizon, std::uint64_t seed = 1) {
  ExperimentConfig cfg;
  cfg.horizon = horizon;
  cfg.seed = seed;
  return cfg;
}

std::string csv_text(const std::vector<SlotRecord>& r) {
  std::ostringstream os;
  write_csv(os, r);
  return os.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(json::parse(R"({
    "name": "x", "channel": "paper-two-state", "csit": "two-state-phase",
    "controller": {"type": "dpp", "v": 50}, "horizon": 10, "seed": 7})"));
  CHECK(cfg.name == "x");
  CHECK(std::get<DppSpec>(cfg.controller).v == 50.0);
  CHECK(std::holds_alternative<CsitTable>(cfg.csit));
  CHECK(std::holds_alternative<Instantaneous>(cfg.delay));
  CHECK(controller_label(cfg.controller) == "dpp(v=50)");

  const auto ogd = parse_config(json::parse(R"({"controller": {"type": "ogd", "step": "inverse-sqrt", "t_delay": 3}})"));
  CHECK(std::holds_alternative<InverseSqrtStep>(std::get<OgdSpec>(ogd.controller).step));
  REQUIRE(std::holds_alternative<Delayed>(ogd.delay));
  CHECK(std::get<Delayed>(ogd.delay).t_slots == 3);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config(json::parse(R"({"horizon": 10, "colour": 1})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"p": 1, "p_bar": 2})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"horizon": 0})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"controller": {"type": "sgd"}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"controller": {"type": "ogd", "gamma": 0.1, "step": "inverse-sqrt"}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"channel": "paper-continuous", "csit": "two-state-mag-phase"})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"controller": {"type": "dpp"}, "delay": {"type": "delayed", "t_slots": 2}})")),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("dpp run shape and running averages") {
  const auto r = run_experiment(dpp_config(100));
  REQUIRE(r.records.size() == 100);
  double sum_r = 0.0, sum_p = 0.0;
  for (std::size_t t = 0; t < 100; ++t) {
    const auto& rec = r.records[t];
    CHECK(rec.t == t);
    CHECK(rec.tr_q <= 3.0);
    REQUIRE(rec.z.has_value());
    CHECK(*rec.z >= 0.0);
    sum_r += rec.r;
    sum_p += rec.tr_q;
    CHECK(rec.runavg_r == doctest::Approx(sum_r / (t + 1)).epsilon(1e-12));
    CHECK(rec.runavg_tr_q == doctest::Approx(sum_p / (t + 1)).epsilon(1e-12));
  }
  CHECK(r.summary.all_hard_passed());
  CHECK(r.reference_per_slot.empty());
}

TEST_CASE("runs are deterministic in the seed") {
  const auto a = run_experiment(dpp_config(200, 3));
  const auto b = run_experiment(dpp_config(200, 3));
  const auto c = run_experiment(dpp_config(200, 4));
  CHECK(csv_text(a.records) == csv_text(b.records));
  CHECK(csv_text(a.records) != csv_text(c.records));
}

TEST_CASE("csv round trip and certificate replay") {
  ExperimentConfig cfg = dpp_config(300);
  cfg.csit = presets::mag_phase_csit_table();
  const auto r = run_experiment(cfg);
  std::istringstream in(csv_text(r.records));
  const auto back = read_csv(in);
  REQUIRE(back.size() == r.records.size());
  for (std::size_t t = 0; t < back.size(); ++t) {
    CHECK(back[t].r == r.records[t].r);
    CHECK(back[t].runavg_tr_q == r.records[t].runavg_tr_q);
    CHECK(back[t].z == r.records[t].z);
  }
  const auto replay = certify(cfg, r.summary, back, {});
  REQUIRE(replay.size() == r.summary.certificates.size());
  for (std::size_t i = 0; i < replay.size(); ++i) {
    CHECK(replay[i].name == r.summary.certificates[i].name);
    CHECK(replay[i].passed == r.summary.certificates[i].passed);
    CHECK(replay[i].worst_margin == r.summary.certificates[i].worst_margin);
  }
}

TEST_CASE("empty record set writes the header only") {
  CHECK(csv_text({}) == std::string(kCsvHeader) + "\n");
  std::istringstream in(std::string(kCsvHeader) + "\n");
  CHECK(read_csv(in).empty());
  std::istringstream bad("t,r\n1,2\n");
  CHECK_THROWS_AS(read_csv(bad), ConfigError);
}

TEST_CASE("ogd run records a reference and respects the cap") {
  ExperimentConfig cfg;
  cfg.controller = OgdSpec{ConstantStep{0.01}, 1};
  cfg.delay = Delayed{1};
  cfg.horizon = 200;
  const auto r = run_experiment(cfg);
  CHECK(r.reference_per_slot.size() == 200);
  for (const auto& rec : r.records) {
    CHECK(rec.tr_q <= 2.0);
    CHECK_FALSE(rec.z.has_value());
  }
  CHECK(r.records[0].tr_q == 0.0);
  REQUIRE(r.summary.bounds.has_value());
  CHECK(r.summary.all_hard_passed());
}

TEST_CASE("baseline policies round trip through JSON") {
  ExperimentConfig cfg = dpp_config(50);
  cfg.controller = BaselineSpec{BaselineKind::kCdiOptimal, std::nullopt, 100};
  const auto p = build_baseline(cfg);
  CHECK(p.states.size() == 2);
  const auto back = policy_from_json(json::parse(policy_to_json(p).dump()));
  CHECK(back.kind == p.kind);
  CHECK(back.r_opt == p.r_opt);
  CHECK(back.covariances == p.covariances);
  CHECK(back.states == p.states);

  const auto direct = run_experiment(cfg);
  const auto stored = run_experiment(cfg, back);
  CHECK(csv_text(direct.records) == csv_text(stored.records));
}

TEST_CASE("rate adaptation summary") {
  ExperimentConfig cfg = dpp_config(500);
  cfg.rate_adapt = RateAdaptSpec{100.0};
  const auto r = run_experiment(cfg);
  REQUIRE(r.summary.ledger.has_value());
  REQUIRE(r.summary.ledger->completed_at.has_value());
  CHECK(r.summary.ledger->decode_ok);
  double sum = 0.0;
  for (std::size_t t = 0; t < *r.summary.ledger->completed_at; ++t) sum += r.records[t].r;
  CHECK(sum >= 100.0);
  CHECK(sum - r.records[*r.summary.ledger->completed_at - 1].r < 100.0);
}

TEST_CASE("outputs land on disk") {
  const auto dir = std::filesystem::temp_directory_path() / "mimocov_test_harness";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg;
  cfg.controller = OgdSpec{ConstantStep{0.01}, 1};
  cfg.delay = Delayed{1};
  cfg.horizon = 50;
  cfg.output.csv = dir / "run.csv";
  cfg.output.summary = dir / "run.json";
  cfg.output.svg = dir / "run";
  emit_outputs(run_experiment(cfg), cfg.output);
  CHECK(std::filesystem::exists(dir / "run.csv"));
  CHECK(std::filesystem::exists(dir / "run.ref.csv"));
  CHECK(std::filesystem::exists(dir / "run_utility.svg"));
  CHECK(std::filesystem::exists(dir / "run_power.svg"));
  const auto summary = read_json_file(dir / "run.json");
  CHECK(summary.at("horizon") == 50);
  std::filesystem::remove_all(dir);
}

TEST_CASE("matrix json") {
  const ComplexMatrix a(1, 2, {Complex{1, -2}, Complex{0.5, 0}});
  CHECK(matrix_from_json(matrix_to_json(a)) == a);
  CHECK(matrix_from_json(json::parse(R"({"rows":1,"cols":1,"entries":[3]})"))(0, 0) == Complex{3, 0});
  CHECK_THROWS_AS(matrix_from_json(json::parse(R"({"rows":2,"cols":1,"entries":[[1,0]]})")), ConfigError);
  CHECK(format_double(0.1) == "0.1");
}

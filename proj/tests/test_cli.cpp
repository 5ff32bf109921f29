#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "jeffmix/cli.hpp"

using namespace jeffmix;

namespace {

std::filesystem::path tmpdir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_model(const std::filesystem::path& p) {
  write_json_atomic(p, ordered_json{{"k", 3},
                                    {"family", "gaussian"},
                                    {"weights", {0.25, 0.10, 0.65}},
                                    {"locations", {-10.0, 0.0, 15.0}},
                                    {"scales", {1.0, 5.0, 7.0}}});
}

}  // namespace

TEST_CASE("cli: usage and runtime error exit codes") {
  CHECK(cli::dispatch({}) == 2);
  CHECK(cli::dispatch({"frobnicate"}) == 2);
  CHECK(cli::dispatch({"fim"}) == 2);  // missing required --model
  // missing file is a runtime error (exit 1), with the path in the message
  const auto out = tmpdir("jeffmix_cli_err");
  CHECK(cli::dispatch({"fim", "--model", (out / "absent.json").string(),
                       "--out", out.string()}) == 1);
  // malformed model file is a config error (exit 2)
  write_text_atomic(out / "bad.json", "{\"k\": 2}\n");
  CHECK(cli::dispatch({"fim", "--model", (out / "bad.json").string(),
                       "--out", out.string()}) == 2);
  // invalid flag values
  write_model(out / "m.json");
  CHECK(cli::dispatch({"fim", "--model", (out / "m.json").string(), "--method", "simpson",
                       "--out", out.string()}) == 2);
  CHECK(cli::dispatch({"sample", "--data", "galaxy", "--prior", "weird",
                       "--out", out.string()}) == 2);
}

TEST_CASE("cli: fim and prior-eval write artifacts") {
  const auto out = tmpdir("jeffmix_cli_fim");
  write_model(out / "m.json");
  CHECK(cli::dispatch({"fim", "--model", (out / "m.json").string(), "--scenario", "weights",
                       "--method", "riemann:550", "--out", out.string()}) == 0);
  const auto j = ordered_json::parse(slurp(out / "fim.json"));
  CHECK(j["dim"].get<int>() == 2);
  CHECK(j["log_jeffreys"].get<double>() == doctest::Approx(1.6862593365596895).epsilon(1e-6));
  CHECK(j["fim"][0][0].get<double>() == doctest::Approx(5.326164042649817).epsilon(1e-6));

  CHECK(cli::dispatch({"prior-eval", "--model", (out / "m.json").string(), "--scenario",
                       "weights", "--method", "gk:1e-8", "--out", out.string()}) == 0);
  const auto pj = ordered_json::parse(slurp(out / "prior-eval.json"));
  CHECK(pj["method"].get<std::string>() == "gk:1e-08");
}

TEST_CASE("cli: study reruns are byte-identical") {
  const auto out1 = tmpdir("jeffmix_cli_s1");
  const auto out2 = tmpdir("jeffmix_cli_s2");
  const auto cfgp = out1 / "cfg.json";
  write_json_atomic(cfgp, ordered_json{{"schema_version", 1},
                                       {"kind", "overfit-null"},
                                       {"sample_sizes", {50}},
                                       {"replications", 2},
                                       {"iterations", 600},
                                       {"burn_in", 200}});
  CHECK(cli::dispatch({"study", "--config", cfgp.string(), "--seed", "7", "--out",
                       out1.string(), "--threads", "1"}) == 0);
  CHECK(cli::dispatch({"study", "--config", cfgp.string(), "--seed", "7", "--out",
                       out2.string(), "--threads", "2"}) == 0);
  CHECK(slurp(out1 / "overfit-null.csv") == slurp(out2 / "overfit-null.csv"));
  CHECK(slurp(out1 / "overfit-null.json") == slurp(out2 / "overfit-null.json"));
  CHECK(cli::dispatch({"study", "--kind", "nonsense", "--out", out1.string()}) == 2);
}

TEST_CASE("cli: dataset resolution, sidecar transform, env out dir") {
  const auto out = tmpdir("jeffmix_cli_data");
  // csv with header and a log sidecar
  write_text_atomic(out / "toy.csv", "value\n1.0\n2.0\n4.0\n8.0\n");
  write_json_atomic(out / "toy.json", ordered_json{{"transform", "log"}, {"name", "toy"}});
  const Dataset d = cli::resolve_dataset((out / "toy.csv").string());
  CHECK(d.n() == 4);
  CHECK(d.name == "toy");
  CHECK(d.values[3] == doctest::Approx(std::log(8.0)));
  // raw negative data with a log sidecar fails loudly
  write_text_atomic(out / "neg.csv", "value\n1.0\n-2.0\n");
  write_json_atomic(out / "neg.json", ordered_json{{"transform", "log"}});
  CHECK_THROWS_AS(cli::resolve_dataset((out / "neg.csv").string()),
                  const parameter_domain_error&);
  // builtin names resolve without files
  CHECK(cli::resolve_dataset("galaxy").n() == 82);

  // JEFFMIX_OUT provides the default output directory
  const auto env_out = tmpdir("jeffmix_cli_env");
  setenv("JEFFMIX_OUT", env_out.string().c_str(), 1);
  write_model(out / "m.json");
  CHECK(cli::dispatch({"fim", "--model", (out / "m.json").string()}) == 0);
  CHECK(std::filesystem::exists(env_out / "fim.json"));
  unsetenv("JEFFMIX_OUT");
}

TEST_CASE("cli: analyze writes a table-style summary file") {
  const auto out = tmpdir("jeffmix_cli_an");
  write_text_atomic(out / "mini.csv",
                    "x\n-2.1\n-1.9\n-2.4\n-1.8\n-2.0\n1.9\n2.2\n2.1\n1.7\n2.3\n-2.2\n2.0\n");
  CHECK(cli::dispatch({"analyze", "--data", (out / "mini.csv").string(), "--k", "3",
                       "--iterations", "600", "--burn-in", "200", "--seed", "2", "--out",
                       out.string()}) == 0);
  const auto j = ordered_json::parse(slurp(out / "analyze-mini.json"));
  CHECK(j["k"].get<int>() == 3);
  CHECK(j["components"].size() >= 1);
  CHECK(std::filesystem::exists(out / "analyze-mini.csv"));
  CHECK(std::filesystem::exists(out / "analyze-mini.svg"));
}

TEST_CASE("cli: diagnose and sample run end to end") {
  const auto out = tmpdir("jeffmix_cli_run");
  write_text_atomic(out / "tiny.csv",
                    "x\n0.1\n-0.4\n0.9\n1.3\n-1.1\n0.5\n0.2\n-0.3\n2.0\n-0.8\n");
  CHECK(cli::dispatch({"sample", "--data", (out / "tiny.csv").string(), "--k", "2",
                       "--iterations", "800", "--burn-in", "200", "--seed", "3", "--out",
                       out.string()}) == 0);
  const auto sj = ordered_json::parse(slurp(out / "sample.json"));
  CHECK(sj["components"].size() == 2);
  CHECK(cli::dispatch({"diagnose", "--data", (out / "tiny.csv").string(), "--k", "2",
                       "--iterations", "800", "--burn-in", "200", "--seed", "3", "--out",
                       out.string()}) == 0);
  CHECK(std::filesystem::exists(out / "diagnose.json"));
}

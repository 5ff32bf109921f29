#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jeffmix/experiments.hpp"

namespace jeffmix::cli {

inline ComponentFamily parse_family(const std::string& s) {
  if (s == "gaussian" || s == "normal") return ComponentFamily::gaussian();
  if (s == "gumbel") return ComponentFamily::gumbel();
  if (s.rfind("student:", 0) == 0) {
    const double df = std::strtod(s.c_str() + 8, nullptr);
    if (!(df > 0.0)) throw config_error("family: student df must be positive, got '" + s + "'");
    return ComponentFamily::student(df);
  }
  throw config_error("family: expected gaussian, gumbel or student:DF, got '" + s + "'");
}

inline PriorMode parse_prior(const std::string& s) {
  if (s == "hierarchical") return PriorMode::hierarchical;
  if (s == "full-jeffreys") return PriorMode::full_jeffreys;
  if (s == "cond-sigma-proper") return PriorMode::cond_sigma_proper;
  throw config_error(
      "prior: expected hierarchical, full-jeffreys or cond-sigma-proper, got '" + s + "'");
}

/// --method riemann:N | mc:N | gk:TOL | auto
inline void apply_method(const std::string& s, IntegratorConfig& cfg) {
  if (s.empty() || s == "auto") {
    cfg.method = IntegratorMethod::auto_select;
    return;
  }
  if (s.rfind("riemann", 0) == 0) {
    cfg.method = IntegratorMethod::riemann;
    if (s.size() > 8) cfg.riemann_points = std::atoi(s.c_str() + 8);
    if (cfg.riemann_points <= 0) throw config_error("method: bad riemann point count in '" + s + "'");
    return;
  }
  if (s.rfind("mc", 0) == 0) {
    cfg.method = IntegratorMethod::monte_carlo;
    if (s.size() > 3) cfg.mc_samples = std::atoi(s.c_str() + 3);
    if (cfg.mc_samples <= 0) throw config_error("method: bad mc sample count in '" + s + "'");
    return;
  }
  if (s.rfind("gk", 0) == 0) {
    cfg.method = IntegratorMethod::gauss_kronrod;
    if (s.size() > 3) cfg.gk_rel_tol = std::strtod(s.c_str() + 3, nullptr);
    if (!(cfg.gk_rel_tol > 0.0)) throw config_error("method: bad gk tolerance in '" + s + "'");
    return;
  }
  throw config_error("method: expected riemann:N, mc:N, gk:TOL or auto, got '" + s + "'");
}

inline Scenario parse_scenario(const std::string& s) {
  if (s == "weights") return Scenario::weights_only();
  if (s == "locations") return Scenario::locations_only();
  if (s == "all") return Scenario::all_params();
  throw config_error("scenario: expected weights, locations or all, got '" + s + "'");
}

inline MixtureParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw error("cannot open model file: " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw config_error("model " + path.string() + ": " + e.what());
  }
  MixtureParams m;
  try {
    m.family = parse_family(j.value("family", std::string("gaussian")));
    if (m.family.kind == ComponentFamily::Kind::student_t && j.contains("df"))
      m.family.df = j["df"].get<double>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.locations = j.at("locations").get<std::vector<double>>();
    m.scales = j.at("scales").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error("model " + path.string() + ": " + e.what());
  }
  try {
    m.validate();
  } catch (const parameter_domain_error& e) {
    throw config_error("model " + path.string() + ": " + e.what());
  }
  return m;
}

/// Dataset spec: a builtin name (galaxy, enzyme, acidity, network) or a CSV
/// path; a sidecar <stem>.json may set {"transform": "log", "name": ...}.
inline Dataset resolve_dataset(const std::string& spec) {
  if (spec == "galaxy" || spec == "enzyme" || spec == "acidity" || spec == "network")
    return load_builtin(spec);
  const std::filesystem::path path(spec);
  Dataset::Transform transform = Dataset::Transform::none;
  std::string name;
  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".json");
  if (std::filesystem::exists(sidecar)) {
    std::ifstream in(sidecar);
    ordered_json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw config_error("sidecar " + sidecar.string() + ": " + e.what());
    }
    const std::string t = j.value("transform", std::string("none"));
    if (t == "log")
      transform = Dataset::Transform::log_scale;
    else if (t != "none")
      throw config_error("sidecar " + sidecar.string() + ": transform must be none or log");
    name = j.value("name", std::string());
  }
  return load_csv(path, transform, name);
}

inline std::filesystem::path resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("JEFFMIX_OUT")) return env;
  return "out";
}

inline ordered_json fim_to_json(const FisherMatrix& f) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < f.dim; ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < f.dim; ++j) row.push_back(f.at(i, j));
    rows.push_back(row);
  }
  return rows;
}

struct StudyFileConfig {
  std::string kind;
  StudyConfig study;
};

inline void apply_study_json(const ordered_json& j, std::string& kind, StudyConfig& cfg) {
  try {
    if (j.contains("schema_version") && j["schema_version"].get<int>() != kOutputSchemaVersion)
      throw config_error("config: unsupported schema_version");
    if (j.contains("kind")) kind = j["kind"].get<std::string>();
    if (j.contains("sample_sizes")) cfg.sample_sizes = j["sample_sizes"].get<std::vector<int>>();
    if (j.contains("replications")) cfg.replications = j["replications"].get<int>();
    if (j.contains("ks")) cfg.ks = j["ks"].get<std::vector<int>>();
    if (j.contains("iterations")) cfg.mcmc.iterations = j["iterations"].get<int>();
    if (j.contains("burn_in")) cfg.mcmc.burn_in = j["burn_in"].get<int>();
    if (j.contains("adaptation_window"))
      cfg.mcmc.adaptation_window = j["adaptation_window"].get<int>();
    if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("grid_points")) cfg.grid_points = j["grid_points"].get<int>();
    if (j.contains("prior")) cfg.mcmc.prior_mode = parse_prior(j["prior"].get<std::string>());
    if (j.contains("prior_modes")) {
      cfg.prior_modes.clear();
      for (const auto& s : j["prior_modes"]) cfg.prior_modes.push_back(parse_prior(s.get<std::string>()));
    }
    if (j.contains("method")) {
      const auto s = j["method"].get<std::string>();
      apply_method(s, cfg.mcmc.integrator);
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
}

inline int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"jeffmix: objective priors for finite mixtures via information quadrature"};
  app.require_subcommand(1);

  // shared option storage
  std::string model_path, scenario_str = "all", method_str, data_spec, out_flag;
  std::string family_str = "gaussian", prior_str = "hierarchical";
  std::string config_path, kind;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int k = 10, iterations = 0, burn_in = -1, threads = 0, replications = 0;
  std::string family_a = "gumbel", family_b = "gaussian";
  int k_a = 3, k_b = 3;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_flag, "output directory (default $JEFFMIX_OUT or ./out)");
    sub->add_option("--threads", threads, "max concurrent cells (default: hardware)");
    sub->add_flag_callback("--version", [] {});
    auto* s = sub->add_option("--seed", seed, "seed override");
    s->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* c_fim = app.add_subcommand("fim", "Fisher information matrix of a model file");
  c_fim->add_option("--model", model_path, "model JSON")->required();
  c_fim->add_option("--scenario", scenario_str, "weights|locations|all");
  c_fim->add_option("--method", method_str, "riemann:N | mc:N | gk:TOL | auto");
  add_common(c_fim);

  CLI::App* c_prior = app.add_subcommand("prior-eval", "log prior value for a model file");
  c_prior->add_option("--model", model_path, "model JSON")->required();
  c_prior->add_option("--scenario", scenario_str, "weights|locations|all");
  c_prior->add_option("--method", method_str, "riemann:N | mc:N | gk:TOL | auto");
  add_common(c_prior);

  CLI::App* c_sample = app.add_subcommand("sample", "run one MCMC chain");
  c_sample->add_option("--data", data_spec, "dataset name or CSV path")->required();
  c_sample->add_option("--k", k, "number of components");
  c_sample->add_option("--family", family_str, "gaussian | gumbel | student:DF");
  c_sample->add_option("--prior", prior_str, "hierarchical | full-jeffreys | cond-sigma-proper");
  c_sample->add_option("--iterations", iterations, "MCMC iterations");
  c_sample->add_option("--burn-in", burn_in, "burn-in iterations");
  c_sample->add_option("--method", method_str, "prior quadrature method");
  add_common(c_sample);

  CLI::App* c_analyze = app.add_subcommand("analyze", "full dataset analysis");
  c_analyze->add_option("--data", data_spec, "dataset name or CSV path")->required();
  c_analyze->add_option("--k", k, "number of components (default 10)");
  c_analyze->add_option("--family", family_str, "gaussian | gumbel | student:DF");
  c_analyze->add_option("--iterations", iterations, "MCMC iterations (default 50000)");
  c_analyze->add_option("--burn-in", burn_in, "burn-in (default 10000)");
  add_common(c_analyze);

  CLI::App* c_study = app.add_subcommand("study", "run a reproducible study");
  c_study->add_option("--kind", kind, "overfit-null | overfit-k | weights-shape | improperness");
  c_study->add_option("--config", config_path, "study config JSON");
  c_study->add_option("--replications", replications, "replication count override");
  c_study->add_option("--iterations", iterations, "MCMC iterations override");
  add_common(c_study);

  CLI::App* c_diag = app.add_subcommand("diagnose", "run a chain and report diagnostics");
  c_diag->add_option("--data", data_spec, "dataset name or CSV path")->required();
  c_diag->add_option("--k", k, "number of components");
  c_diag->add_option("--family", family_str, "component family");
  c_diag->add_option("--prior", prior_str, "prior mode");
  c_diag->add_option("--iterations", iterations, "MCMC iterations");
  c_diag->add_option("--burn-in", burn_in, "burn-in iterations");
  add_common(c_diag);

  CLI::App* c_bench = app.add_subcommand("benchmark-integrators", "integrator stability study");
  c_bench->add_option("--model", model_path, "model JSON")->required();
  add_common(c_bench);

  CLI::App* c_bf = app.add_subcommand("bayes-factor", "bridge-sampling Bayes factor A vs B");
  c_bf->add_option("--data", data_spec, "dataset name or CSV path")->required();
  c_bf->add_option("--ka", k_a, "components of model A");
  c_bf->add_option("--familya", family_a, "family of model A");
  c_bf->add_option("--kb", k_b, "components of model B");
  c_bf->add_option("--familyb", family_b, "family of model B");
  c_bf->add_option("--iterations", iterations, "MCMC iterations per model");
  c_bf->add_option("--burn-in", burn_in, "burn-in iterations");
  add_common(c_bf);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help() << std::flush;
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << std::flush;
    return 2;
  }

  try {
    StudyConfig study;
    study.threads = threads;
    if (seed_set) study.master_seed = seed;
    study.out_dir = resolve_out_dir(out_flag);

    if (app.got_subcommand(c_fim) || app.got_subcommand(c_prior)) {
      const MixtureParams m = load_model(model_path);
      const Scenario sc = parse_scenario(scenario_str);
      IntegratorConfig integ;
      apply_method(method_str, integ);
      if (seed_set) integ.seed = seed;
      const LogPriorValue v = log_jeffreys(m, sc, integ);
      ordered_json j{{"schema_version", kOutputSchemaVersion},
                     {"scenario", sc.name()},
                     {"method", v.method.describe()},
                     {"log_jeffreys", v.value},
                     {"jitter_applied", v.jitter_applied}};
      if (app.got_subcommand(c_fim)) {
        const FisherMatrix f = fim(m, sc, integ);
        j["dim"] = f.dim;
        j["fim"] = fim_to_json(f);
        for (int i = 0; i < f.dim; ++i) {
          for (int jj = 0; jj < f.dim; ++jj) std::cout << format_double(f.at(i, jj)) << (jj + 1 < f.dim ? " " : "");
          std::cout << "\n";
        }
        write_json_atomic(study.out_dir / "fim.json", j);
      } else {
        write_json_atomic(study.out_dir / "prior-eval.json", j);
      }
      std::cout << "log-jeffreys(" << sc.name() << ", " << v.method.describe()
                << ") = " << format_double(v.value) << "\n";
      return 0;
    }

    if (app.got_subcommand(c_sample) || app.got_subcommand(c_diag)) {
      const Dataset data = resolve_dataset(data_spec);
      McmcConfig mc = study.mcmc;
      mc.prior_mode = parse_prior(prior_str);
      if (iterations > 0) mc.iterations = iterations;
      if (burn_in >= 0) mc.burn_in = burn_in;
      if (!method_str.empty()) apply_method(method_str, mc.integrator);
      mc.seed = seed_set ? seed : 1;
      const ChainTrace trace = run_chain(data, k, parse_family(family_str), mc);
      const DiagnosticsReport rep = diagnose(trace, mc.thresholds);
      ordered_json dj{{"stuck", rep.stuck},
                      {"diverged", rep.diverged},
                      {"sigma_below_eps_fraction", rep.sigma_below_eps_fraction},
                      {"mu_beyond_fraction", rep.mu_beyond_fraction},
                      {"acceptance",
                       {{"weights", rep.block_acceptance[0]},
                        {"locations", rep.block_acceptance[1]},
                        {"scales", rep.block_acceptance[2]},
                        {"hyper", rep.block_acceptance[3]}}}};
      if (app.got_subcommand(c_diag)) {
        write_json_atomic(study.out_dir / "diagnose.json",
                          ordered_json{{"schema_version", kOutputSchemaVersion},
                                       {"dataset", data.name},
                                       {"k", k},
                                       {"prior", prior_str},
                                       {"diagnostics", dj}});
        std::cout << "diagnose " << data.name << ": stuck=" << (rep.stuck ? "yes" : "no")
                  << " diverged=" << (rep.diverged ? "yes" : "no") << "\n";
        return 0;
      }
      const PosteriorSummary sum = summarize(trace);
      ordered_json comps = ordered_json::array();
      for (const auto& c : sum.components)
        comps.push_back({{"weight_mean", c.weight_mean},
                         {"location_mean", c.location_mean},
                         {"scale_mean", c.scale_mean}});
      write_json_atomic(study.out_dir / "sample.json",
                        ordered_json{{"schema_version", kOutputSchemaVersion},
                                     {"dataset", data.name},
                                     {"k", k},
                                     {"prior", prior_str},
                                     {"iterations", mc.iterations},
                                     {"burn_in", mc.burn_in},
                                     {"seed", mc.seed},
                                     {"components", comps},
                                     {"diagnostics", dj}});
      std::cout << "sampled " << data.name << " k=" << k << ": top weight "
                << format_double(sum.components.front().weight_mean) << ", "
                << sum.detected_components << " components above 0.02\n";
      return 0;
    }

    if (app.got_subcommand(c_analyze)) {
      const Dataset data = resolve_dataset(data_spec);
      study.mcmc.iterations = iterations > 0 ? iterations : 50000;
      study.mcmc.burn_in = burn_in >= 0 ? burn_in : 10000;
      const AnalysisResult res = dataset_analysis(data, k, parse_family(family_str), study);
      std::cout << "analyze " << data.name << " k=" << k << ": "
                << res.summary.detected_components << " components above 0.02, top weights";
      for (int i = 0; i < std::min<int>(2, int(res.summary.components.size())); ++i)
        std::cout << " " << format_double(res.summary.components[i].weight_mean);
      std::cout << "\n";
      return 0;
    }

    if (app.got_subcommand(c_study)) {
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw error("cannot open config file: " + config_path);
        ordered_json j;
        try {
          in >> j;
        } catch (const std::exception& e) {
          throw config_error(std::string("config: ") + e.what());
        }
        apply_study_json(j, kind, study);
      }
      if (seed_set) study.master_seed = seed;
      if (replications > 0) study.replications = replications;
      if (iterations > 0) study.mcmc.iterations = iterations;
      study.threads = threads;
      if (kind == "overfit-null") {
        const auto r = overfit_null_study(study);
        std::cout << "overfit-null: wrote " << (study.out_dir / "overfit-null.json").string()
                  << "\n";
      } else if (kind == "overfit-k") {
        overfit_k_study(study);
        std::cout << "overfit-k: wrote " << (study.out_dir / "overfit-k.json").string() << "\n";
      } else if (kind == "weights-shape") {
        weights_prior_shape_study(default_shape_specs(), study);
        std::cout << "weights-shape: wrote " << (study.out_dir / "weights-shape.json").string()
                  << "\n";
      } else if (kind == "improperness") {
        improperness_study(study);
        std::cout << "improperness: wrote " << (study.out_dir / "improperness.json").string()
                  << "\n";
      } else {
        throw config_error("study: unknown kind '" + kind + "'");
      }
      return 0;
    }

    if (app.got_subcommand(c_bench)) {
      const MixtureParams m = load_model(model_path);
      const auto r = integrator_benchmark(m, study);
      std::cout << "benchmark-integrators: reference " << format_double(r.reference_log_prior)
                << ", max element gap " << format_double(r.max_element_rel_gap) << "\n";
      return 0;
    }

    if (app.got_subcommand(c_bf)) {
      const Dataset data = resolve_dataset(data_spec);
      if (iterations > 0) study.mcmc.iterations = iterations;
      if (burn_in >= 0) study.mcmc.burn_in = burn_in;
      const auto r = bayes_factor(data, k_a, parse_family(family_a), k_b,
                                  parse_family(family_b), study);
      std::cout << "bayes-factor " << data.name << " (" << family_a << " k=" << k_a << " vs "
                << family_b << " k=" << k_b << "): BF = " << format_double(r.bf)
                << " (log " << format_double(r.log_bf) << " +- "
                << format_double(r.se_log_bf) << ")\n";
      return 0;
    }

    throw config_error("no subcommand selected");
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace jeffmix::cli

#include "hdpmpm/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "hdpmpm/analysis.hpp"
#include "hdpmpm/errors.hpp"
#include "hdpmpm/geweke.hpp"
#include "hdpmpm/io.hpp"
#include "hdpmpm/lab.hpp"
#include "hdpmpm/sampler.hpp"

namespace hdpmpm {

namespace {

// "12-23,2,5" -> 0-based indices, order kept, duplicates dropped.
std::vector<int> parse_var_list(const std::string& spec) {
  std::vector<int> out;
  auto push = [&](int index_1based) {
    const int index = index_1based - 1;
    if (index < 0) throw DataError("variable list: indices are 1-based, got " + std::to_string(index_1based));
    for (int existing : out) {
      if (existing == index) return;
    }
    out.push_back(index);
  };
  std::string token;
  std::istringstream stream(spec);
  while (std::getline(stream, token, ',')) {
    if (token.empty()) continue;
    const auto dash = token.find('-');
    if (dash == std::string::npos) {
      push(std::stoi(token));
    } else {
      const int lo = std::stoi(token.substr(0, dash));
      const int hi = std::stoi(token.substr(dash + 1));
      if (hi < lo) throw DataError("variable list: empty range '" + token + "'");
      for (int v = lo; v <= hi; ++v) push(v);
    }
  }
  if (out.empty()) throw DataError("variable list: no indices in '" + spec + "'");
  return out;
}

std::vector<std::pair<int, int>> parse_marginals(const std::string& spec) {
  std::vector<std::pair<int, int>> out;
  std::string token;
  std::istringstream stream(spec);
  while (std::getline(stream, token, ',')) {
    if (token.empty()) continue;
    const auto colon = token.find(':');
    if (colon == std::string::npos) throw DataError("marginals: expected j:d pairs, got '" + token + "'");
    out.emplace_back(std::stoi(token.substr(0, colon)) - 1, std::stoi(token.substr(colon + 1)) - 1);
  }
  return out;
}

struct SimulateArgs {
  std::string spec_path;
  std::string out_path;
  std::string truth_path;
  std::string dict_path;
  std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateArgs& args) {
  const GenSpec spec = load_genspec(args.spec_path);
  RandomStream stream(args.seed, 0);
  auto [data, truth] = generate_synthetic(spec, stream);
  save_csv(data, args.out_path);
  const std::string truth_path =
      args.truth_path.empty() ? args.out_path + ".truth.json" : args.truth_path;
  save_truth(truth, truth_path);
  DataDictionary dict;
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    VariableSpec var;
    var.name = data.variable_names[static_cast<std::size_t>(j)];
    var.levels = data.levels[j];
    dict.variables.push_back(std::move(var));
  }
  const std::string dict_path = args.dict_path.empty() ? args.out_path + ".dict.json" : args.dict_path;
  save_dictionary(dict, dict_path);
  std::cout << "simulate: wrote " << data.n() << "x" << data.p() << " dataset to " << args.out_path
            << " (truth: " << truth_path << ", dictionary: " << dict_path << ")\n";
  return 0;
}

struct MaskArgs {
  std::string data_path;
  std::string dict_path;
  std::string out_path;
  std::string sidecar_path;
  std::string vars;
  std::string mar_path;
  double mcar_rate = -1.0;
  std::uint64_t seed = 1;
};

int cmd_mask(const MaskArgs& args) {
  const DataDictionary dict =
      args.dict_path.empty() ? infer_dictionary(args.data_path) : load_dictionary(args.dict_path);
  const Dataset data = load_csv(args.data_path, dict);
  RandomStream stream(args.seed, 0);

  Dataset masked;
  if (args.mcar_rate >= 0.0) {
    std::vector<int> vars;
    if (args.vars.empty()) {
      for (int j = 0; j < data.p(); ++j) vars.push_back(j);
    } else {
      vars = parse_var_list(args.vars);
    }
    masked = apply_mcar(data, vars, args.mcar_rate, stream);
  } else {
    const MarSpec spec = load_marspec(args.mar_path);
    MarReport report;
    masked = apply_mar(data, spec, stream, &report);
    for (std::size_t t = 0; t < spec.targets.size(); ++t) {
      std::cout << "mask: variable " << (spec.targets[t] + 1) << " intercept "
                << report.intercepts[t] << " realized rate " << report.realized_rates[t] << "\n";
    }
  }

  const std::string out_path = args.out_path.empty()
                                   ? std::filesystem::path(args.data_path).stem().string() + ".masked.csv"
                                   : args.out_path;
  save_csv(masked, out_path);
  const std::string sidecar_path =
      args.sidecar_path.empty() ? out_path + ".sidecar.json" : args.sidecar_path;
  save_mask_sidecar(data, masked, sidecar_path);
  long masked_cells = 0;
  for (Eigen::Index i = 0; i < masked.n(); ++i) {
    for (Eigen::Index j = 0; j < masked.p(); ++j) masked_cells += masked.mask(i, j);
  }
  std::cout << "mask: wrote " << out_path << " with " << masked_cells << " missing cells"
            << " (sidecar: " << sidecar_path << ")\n";
  return 0;
}

struct FitArgs {
  std::string data_path;
  std::string dict_path;
  std::string config_path;
  std::string out_path = "draws.ndjson";
  std::string manifest_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int cmd_fit(const FitArgs& args) {
  const DataDictionary dict = load_dictionary(args.dict_path);
  const Dataset data = load_csv(args.data_path, dict);
  const ValidationReport report = validate_dataset(data);
  if (!report.ok) {
    for (const auto& finding : report.findings) {
      if (finding.hard) std::cerr << "fit: " << finding.message << "\n";
    }
    throw DataError("dataset failed validation with " + std::to_string(report.hard_count) +
                    " hard violations");
  }
  FitConfig cfg = load_fit_config(args.config_path);
  if (args.seed_given) cfg.chain.seed = args.seed;

  RunManifest manifest;
  manifest.config_hash = hash_config(cfg.hp, cfg.chain);
  manifest.seed = cfg.chain.seed;
  manifest.version = software_version();
  manifest.dataset_fingerprint = fingerprint_dataset(data);

  manifest.started_at = current_timestamp();
  PosteriorDraws draws = run_chain(data, cfg.hp, cfg.chain);
  manifest.finished_at = current_timestamp();
  manifest.saturation_events = draws.saturation_events;
  manifest.k_used = draws.hp_echo.k;
  manifest.restarts = draws.restarts;

  const std::string manifest_path =
      args.manifest_path.empty() ? args.out_path + ".manifest.json" : args.manifest_path;
  save_manifest(manifest, manifest_path);
  save_draws(draws, args.out_path, cfg.store, manifest_hash(manifest));
  std::cout << "fit: stored " << draws.draws.size() << " draws to " << args.out_path
            << " (k=" << draws.hp_echo.k << ", restarts=" << draws.restarts
            << ", manifest: " << manifest_path << ")\n";
  return 0;
}

struct SummarizeArgs {
  std::string draws_path;
  std::string profiles;
  std::string pair;
  std::string outdir = ".";
  std::string marginals;
  double threshold = 0.1;
  double person_threshold = 0.1;
};

int cmd_summarize(const SummarizeArgs& args) {
  const PosteriorDraws draws = load_draws(args.draws_path);
  if (draws.draws.empty()) throw DataError(args.draws_path + ": no stored draws");
  const ProfileSummary summary = summarize(draws);
  const std::vector<int> dominant = dominant_profiles(summary, args.threshold);

  std::vector<int> profiles;
  if (!args.profiles.empty()) {
    profiles = parse_var_list(args.profiles);  // same 1-based list syntax
  } else {
    profiles = dominant;
  }
  if (profiles.empty()) {
    // fall back to the two largest clusters so the reports are never empty
    std::vector<int> order = dominant_profiles(summary, -1.0);
    profiles.assign(order.begin(), order.begin() + std::min<std::size_t>(2, order.size()));
  }
  std::pair<int, int> pair;
  if (!args.pair.empty()) {
    const std::vector<int> pair_ids = parse_var_list(args.pair);
    if (pair_ids.size() != 2) throw DataError("--pair needs exactly two profile ids");
    pair = {pair_ids[0], pair_ids[1]};
  } else if (profiles.size() >= 2) {
    pair = {profiles[0], profiles[1]};
  } else {
    pair = {profiles[0], profiles[0]};
  }

  const FunctionalReport functionals = posterior_functionals(draws, profiles, pair);
  std::filesystem::create_directories(args.outdir);
  const std::filesystem::path dir(args.outdir);

  std::vector<std::string> names = draws.variable_names;
  if (names.size() != draws.draws.front().phi.size()) {
    names.clear();
    for (std::size_t j = 0; j < draws.draws.front().phi.size(); ++j) {
      names.push_back("v" + std::to_string(j + 1));
    }
  }
  write_profiles_csv(summary, profiles, names, (dir / "profiles.csv").string());
  write_functionals_csv(functionals, names, (dir / "functionals.csv").string());

  MembershipReport membership;
  bool have_membership = false;
  if (summary.has_pi) {
    membership = membership_summary(summary, args.person_threshold);
    write_membership_csv(membership, (dir / "membership.csv").string());
    have_membership = true;
  } else {
    std::cerr << "summarize: draws carry no pi; membership report skipped\n";
  }
  write_summary_json(summary, dominant, functionals, have_membership ? &membership : nullptr,
                     (dir / "summary.json").string());
  write_trace_csvs(draws, args.outdir,
                   args.marginals.empty() ? std::vector<std::pair<int, int>>{}
                                          : parse_marginals(args.marginals));
  std::cout << "summarize: wrote reports for " << draws.draws.size() << " draws to "
            << args.outdir << " (dominant profiles:";
  for (int c : dominant) std::cout << ' ' << (c + 1);
  std::cout << ")\n";
  return 0;
}

struct ValidateArgs {
  long replicates = 10000;
  std::uint64_t seed = 20240101;
  std::string out_path = "joint_test.json";
  bool corrupt_step4 = false;
};

int cmd_validate(const ValidateArgs& args) {
  JointTestConfig cfg;
  cfg.replicates = args.replicates;
  cfg.seed = args.seed;
  cfg.corrupt_step4 = args.corrupt_step4;
  const JointTestReport report = validate_sampler(cfg);
  write_joint_report_json(report, args.out_path);
  std::cout << "validate: " << report.within_three << "/" << report.stat_count
            << " statistics with |z| < 3, max |z| = " << report.max_abs_z << " -> "
            << (report.pass() ? "pass" : "fail") << " (" << args.out_path << ")\n";
  return report.pass() ? 0 : 3;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Hierarchical Dirichlet process mixture of products of multinomials"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset from a spec");
  simulate->add_option("--spec", sim.spec_path, "GenSpec JSON path")->required();
  simulate->add_option("--out", sim.out_path, "Output CSV path")->required();
  simulate->add_option("--truth", sim.truth_path, "Truth sidecar path");
  simulate->add_option("--dict", sim.dict_path, "Dictionary output path");
  simulate->add_option("--seed", sim.seed, "Random seed");

  MaskArgs mask;
  CLI::App* mask_cmd = app.add_subcommand("mask", "Mask cells MCAR or MAR");
  mask_cmd->add_option("data", mask.data_path, "Input CSV")->required();
  mask_cmd->add_option("--dict", mask.dict_path, "Dictionary path (inferred when omitted)");
  mask_cmd->add_option("--mcar", mask.mcar_rate, "MCAR missingness rate");
  mask_cmd->add_option("--vars", mask.vars, "1-based variable list, e.g. 12-23,3");
  mask_cmd->add_option("--mar", mask.mar_path, "MarSpec JSON path");
  mask_cmd->add_option("--out", mask.out_path, "Masked CSV path");
  mask_cmd->add_option("--sidecar", mask.sidecar_path, "Sidecar path");
  mask_cmd->add_option("--seed", mask.seed, "Random seed");

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit the model by Gibbs sampling");
  fit_cmd->add_option("data", fit.data_path, "Input CSV")->required();
  fit_cmd->add_option("dict", fit.dict_path, "Dictionary JSON")->required();
  fit_cmd->add_option("--config", fit.config_path, "Chain config JSON")->required();
  fit_cmd->add_option("--out", fit.out_path, "Draws output path");
  fit_cmd->add_option("--manifest", fit.manifest_path, "Manifest output path");
  CLI::Option* fit_seed = fit_cmd->add_option("--seed", fit.seed, "Seed override");

  SummarizeArgs summarize_args;
  CLI::App* summarize_cmd = app.add_subcommand("summarize", "Posterior reports from a draws file");
  summarize_cmd->add_option("draws", summarize_args.draws_path, "Draws NDJSON path")->required();
  summarize_cmd->add_option("--profiles", summarize_args.profiles, "1-based profile ids for CR");
  summarize_cmd->add_option("--pair", summarize_args.pair, "Two 1-based profile ids for DR");
  summarize_cmd->add_option("--threshold", summarize_args.threshold, "Dominance threshold");
  summarize_cmd->add_option("--person-threshold", summarize_args.person_threshold,
                            "Person-level dominance threshold");
  summarize_cmd->add_option("--outdir", summarize_args.outdir, "Report directory");
  summarize_cmd->add_option("--marginals", summarize_args.marginals,
                            "Marginal-probability traces, e.g. 1:2,4:1");

  ValidateArgs validate_args;
  CLI::App* validate_cmd = app.add_subcommand("validate", "Joint-distribution sampler check");
  validate_cmd->add_option("--replicates", validate_args.replicates, "Replicates per side");
  validate_cmd->add_option("--seed", validate_args.seed, "Random seed");
  validate_cmd->add_option("--out", validate_args.out_path, "Report JSON path");
  validate_cmd->add_flag("--corrupt-step4", validate_args.corrupt_step4,
                         "Swap the Step-4 Beta parameters (must fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (mask_cmd->parsed()) {
      const bool has_mcar = mask.mcar_rate >= 0.0;
      const bool has_mar = !mask.mar_path.empty();
      if (has_mcar == has_mar) {
        std::cerr << "mask: exactly one of --mcar or --mar is required\n";
        return 1;
      }
      return cmd_mask(mask);
    }
    if (fit_cmd->parsed()) {
      fit.seed_given = fit_seed->count() > 0;
      return cmd_fit(fit);
    }
    if (summarize_cmd->parsed()) return cmd_summarize(summarize_args);
    if (validate_cmd->parsed()) return cmd_validate(validate_args);
  } catch (const SaturationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace hdpmpm

// Command-line front end: fit models on CSV data, run seeded simulation
// experiments, dump synthetic datasets, and compute per-category
// coefficient contributions.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tlqr/csv.hpp"
#include "tlqr/detection.hpp"
#include "tlqr/errors.hpp"
#include "tlqr/evaluation.hpp"
#include "tlqr/experiment.hpp"
#include "tlqr/simulation.hpp"
#include "tlqr/transfer.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tlqr::ParseError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw tlqr::ParseError(path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw tlqr::ParseError("cannot open file for writing: " + path);
  out << content;
}

json coef_to_json(const tlqr::CoefVector& c) {
  json v = json::array();
  for (Eigen::Index i = 0; i < c.beta.size(); ++i) v.push_back(c.beta[i]);
  return v;
}

tlqr::TransferConfig transfer_config_from_json(const json& j) {
  tlqr::TransferConfig cfg;
  if (j.contains("lambda0")) cfg.lambda0 = j.at("lambda0").get<double>();
  if (j.contains("lambda1")) cfg.lambda1 = j.at("lambda1").get<double>();
  if (j.contains("lambda2")) cfg.lambda2 = j.at("lambda2").get<double>();
  if (j.contains("cv_folds")) cfg.cv_folds = j.at("cv_folds").get<int>();
  if (j.contains("qr_tol")) cfg.qr_cfg.tol = j.at("qr_tol").get<double>();
  if (j.contains("qr_max_iter"))
    cfg.qr_cfg.max_iter = j.at("qr_max_iter").get<int>();
  if (j.contains("lasso_tol")) cfg.lasso_cfg.tol = j.at("lasso_tol").get<double>();
  if (j.contains("lasso_max_iter"))
    cfg.lasso_cfg.max_iter = j.at("lasso_max_iter").get<int>();
  if (j.contains("bandwidth"))
    cfg.bandwidth_rule = tlqr::BandwidthRule::fixed(j.at("bandwidth").get<double>());
  if (j.contains("sparsity"))
    cfg.bandwidth_rule.sparsity_override = j.at("sparsity").get<int>();
  return cfg;
}

struct FitArgs {
  std::string target_file;
  std::vector<std::string> source_files;
  double tau = 0.5;
  std::string method = "target-only";
  std::string informative;       // comma-separated 1-based indices
  std::string epsilon0 = "auto";
  int m = -1;
  std::uint64_t seed = 0;
  std::string config_file;
  std::string out_file;
};

int run_fit(const FitArgs& args) {
  tlqr::StudyCollection collection{tlqr::read_dataset_csv(args.target_file),
                                   {},
                                   tlqr::QuantileLevel(args.tau)};
  for (const auto& f : args.source_files)
    collection.sources.push_back(tlqr::read_dataset_csv(f));
  tlqr::validate_collection(collection);

  tlqr::TransferConfig cfg;
  if (!args.config_file.empty())
    cfg = transfer_config_from_json(read_json_file(args.config_file));
  cfg.cv_seed = tlqr::rng::derive_seed(
      args.seed, 0, static_cast<std::uint64_t>(tlqr::rng::Purpose::kCvFolds));

  tlqr::InformativeSet informative;
  if (!args.informative.empty()) {
    std::vector<int> members;
    std::stringstream ss(args.informative);
    std::string tok;
    while (std::getline(ss, tok, ',')) members.push_back(std::stoi(tok));
    informative = tlqr::InformativeSet(std::move(members));
  }

  const tlqr::Method method = tlqr::method_from_name(args.method);
  tlqr::TransferFit fit;
  std::optional<tlqr::DetectionReport> report;

  if (method == tlqr::Method::TargetOnly) {
    fit = tlqr::fit_target_only(collection, cfg);
  } else if (method == tlqr::Method::Oracle) {
    fit = tlqr::fit_oracle(collection, informative, cfg);
  } else if (method == tlqr::Method::Naive) {
    fit = tlqr::fit_naive(collection, cfg);
  } else {
    tlqr::DetectionConfig dcfg;
    dcfg.transfer_cfg = cfg;
    dcfg.split_seed = tlqr::rng::derive_seed(
        args.seed, 0, static_cast<std::uint64_t>(tlqr::rng::Purpose::kSplit));
    if (args.epsilon0 == "auto")
      dcfg.epsilon0 = tlqr::EpsilonRule::automatic();
    else if (args.epsilon0 == "auto-ceps")
      dcfg.epsilon0 = tlqr::EpsilonRule::auto_ceps();
    else
      dcfg.epsilon0 = tlqr::EpsilonRule::fixed(std::stod(args.epsilon0));

    if (method == tlqr::Method::Pseudo) {
      if (args.m < 1)
        throw CLI::ValidationError("--m is required for method pseudo");
      report = tlqr::pseudo_detect(collection, args.m, dcfg);
      fit = tlqr::fit_oracle(collection, report->detected, dcfg.transfer_cfg);
    } else {
      auto [f, r] = tlqr::fit_translasso(collection, dcfg);
      fit = std::move(f);
      report = std::move(r);
    }
  }

  json out;
  out["tool_version"] = tlqr::kToolVersion;
  out["method"] = tlqr::method_name(method);
  out["tau"] = args.tau;
  out["p"] = collection.p();
  out["beta_hat"] = coef_to_json(fit.beta_hat);
  out["beta_fused"] = coef_to_json(fit.beta_fused);
  out["delta_hat"] = coef_to_json(fit.delta_hat);
  out["support"] = fit.beta_hat.support;
  out["set_used"] = fit.set_used.members();
  out["lambdas"] = {{"lambda0", fit.lambdas.lambda0},
                    {"lambda1", fit.lambdas.lambda1},
                    {"lambda2", fit.lambdas.lambda2}};
  out["all_converged"] = fit.all_converged;
  json dens = json::object();
  for (const auto& [k, d] : fit.densities)
    dens[std::to_string(k)] = {
        {"f0", d.f0}, {"bandwidth", d.bandwidth}, {"usable", d.usable}};
  out["densities"] = dens;
  if (report) {
    json r;
    r["detected"] = report->detected.members();
    r["loss_baseline"] = report->loss_baseline;
    r["loss_per_source"] = report->loss_per_source;
    if (std::isfinite(report->epsilon_used))
      r["epsilon_used"] = report->epsilon_used;
    if (report->c_eps) r["c_eps"] = *report->c_eps;
    r["excluded_sources"] = report->excluded_sources;
    out["detection"] = r;
  }
  // provenance stamp over the inputs that define the run
  json prov;
  prov["target"] = args.target_file;
  prov["sources"] = args.source_files;
  prov["method"] = args.method;
  prov["tau"] = args.tau;
  prov["seed"] = args.seed;
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(tlqr::fnv1a64(prov.dump())));
  out["spec_hash"] = buf;

  write_text_file(args.out_file, out.dump(2) + "\n");
  return kExitOk;
}

int run_experiment_cmd(const std::string& spec_file, int jobs,
                       const std::string& out_dir) {
  tlqr::ExperimentSpec spec =
      tlqr::experiment_spec_from_json(read_json_file(spec_file));
  if (jobs > 0) spec.jobs = jobs;

  std::filesystem::create_directories(out_dir);
  const tlqr::ExperimentResults results = tlqr::run_experiment(spec);

  std::ofstream csv(out_dir + "/results.csv");
  if (!csv) throw tlqr::ParseError("cannot write " + out_dir + "/results.csv");
  tlqr::write_results_csv(spec, results, csv);
  csv.close();

  write_text_file(out_dir + "/summary.json",
                  tlqr::summary_json(spec, results).dump(2) + "\n");

  for (const tlqr::MethodSummary& s : results.summary)
    std::printf("%-12s mse_beta %s  quantile_loss %s\n",
                tlqr::method_name(s.method).c_str(),
                tlqr::format_mean_sd(s.mse_mean, s.mse_sd).c_str(),
                tlqr::format_mean_sd(s.ql_mean, s.ql_sd).c_str());
  return kExitOk;
}

int run_simulate(const std::string& spec_file, const std::string& out_dir) {
  const json j = read_json_file(spec_file);
  const tlqr::DesignSpec design =
      tlqr::design_from_json(j.contains("design") ? j.at("design") : j);
  std::filesystem::create_directories(out_dir);

  auto [collection, truth, holdout] = tlqr::generate_collection(design);
  tlqr::write_dataset_csv(collection.target, out_dir + "/target.csv");
  for (int k = 1; k <= collection.num_sources(); ++k) {
    char name[40];
    std::snprintf(name, sizeof(name), "/source_%02d.csv", k);
    tlqr::write_dataset_csv(collection.study(k), out_dir + name);
  }
  tlqr::write_dataset_csv(holdout, out_dir + "/holdout.csv");

  json t = tlqr::ground_truth_to_json(truth);
  t["tool_version"] = tlqr::kToolVersion;
  t["design"] = tlqr::design_to_json(design);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    tlqr::fnv1a64(tlqr::design_to_json(design).dump())));
  t["spec_hash"] = buf;
  write_text_file(out_dir + "/ground_truth.json", t.dump(2) + "\n");
  return kExitOk;
}

tlqr::GroupMap read_groups_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tlqr::ParseError("cannot open file: " + path);
  tlqr::GroupMap groups;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("feature", 0) == 0) continue;  // header
    const auto pos = line.find(',');
    if (pos == std::string::npos)
      throw tlqr::ParseError(path + ":" + std::to_string(line_no) +
                             ": expected 'index,category'");
    int idx = 0;
    try {
      idx = std::stoi(line.substr(0, pos));
    } catch (const std::exception&) {
      throw tlqr::ParseError(path + ":" + std::to_string(line_no) +
                             ": bad feature index '" + line.substr(0, pos) +
                             "'");
    }
    groups.assignment[idx] = line.substr(pos + 1);
  }
  return groups;
}

int run_contrib(const std::string& model_file, const std::string& groups_file,
                const std::string& out_file) {
  const json model = read_json_file(model_file);
  if (!model.contains("beta_hat"))
    throw tlqr::ParseError(model_file + ": missing 'beta_hat'");
  const auto& b = model.at("beta_hat");
  Eigen::VectorXd beta(b.size());
  for (std::size_t i = 0; i < b.size(); ++i)
    beta[static_cast<Eigen::Index>(i)] = b[i].get<double>();

  const tlqr::GroupMap groups = read_groups_csv(groups_file);
  const tlqr::GroupContributions contrib =
      tlqr::group_contributions(tlqr::CoefVector(beta), groups);

  json out;
  out["tool_version"] = tlqr::kToolVersion;
  out["contributions"] = contrib.share;
  out["zero_coefficient_warning"] = contrib.zero_coefficient;
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(tlqr::fnv1a64(model.dump())));
  out["spec_hash"] = buf;
  write_text_file(out_file, out.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transfer learning for high-dimensional quantile regression"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "Fit a model on CSV datasets");
  fit->add_option("--target", fit_args.target_file, "Target dataset CSV")
      ->required();
  fit->add_option("--source", fit_args.source_files,
                  "Source dataset CSV (repeatable)");
  fit->add_option("--tau", fit_args.tau, "Quantile level in (0,1)")->required();
  fit->add_option("--method", fit_args.method,
                  "target-only|oracle|naive|pseudo|translasso")
      ->required();
  fit->add_option("--informative", fit_args.informative,
                  "Comma-separated source indices for method oracle");
  fit->add_option("--epsilon0", fit_args.epsilon0,
                  "Detection strictness: number, 'auto', or 'auto-ceps'");
  fit->add_option("--m", fit_args.m, "Number of sources for method pseudo");
  fit->add_option("--seed", fit_args.seed, "Seed for CV folds and splitting");
  fit->add_option("--config", fit_args.config_file, "Solver config JSON");
  fit->add_option("--out", fit_args.out_file, "Output model JSON")->required();

  std::string spec_file, out_dir, model_file, groups_file, out_file;
  int jobs = 0;
  CLI::App* exp = app.add_subcommand("experiment",
                                     "Run a replicated simulation experiment");
  exp->add_option("--spec", spec_file, "Experiment spec JSON")->required();
  exp->add_option("--jobs", jobs, "Worker threads (default: logical cores)");
  exp->add_option("--out", out_dir, "Output directory")->required();

  std::string sim_spec, sim_out;
  CLI::App* sim = app.add_subcommand("simulate", "Dump one synthetic draw");
  sim->add_option("--spec", sim_spec, "Design spec JSON")->required();
  sim->add_option("--out", sim_out, "Output directory")->required();

  CLI::App* contrib =
      app.add_subcommand("contrib", "Per-category coefficient contributions");
  contrib->add_option("--model", model_file, "Model JSON from fit")->required();
  contrib->add_option("--groups", groups_file, "Feature-to-category CSV")
      ->required();
  contrib->add_option("--out", out_file, "Output JSON")->required();

  try {
    app.parse(argc, argv);
    if (*fit) return run_fit(fit_args);
    if (*exp) return run_experiment_cmd(spec_file, jobs, out_dir);
    if (*sim) return run_simulate(sim_spec, sim_out);
    if (*contrib) return run_contrib(model_file, groups_file, out_file);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const tlqr::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const tlqr::DegenerateDensity& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const tlqr::ZeroBaselineLoss& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const tlqr::NotPSD& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const tlqr::Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

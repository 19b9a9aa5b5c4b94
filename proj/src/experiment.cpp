#include "tlqr/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

#include <nlohmann/json.hpp>

#include "tlqr/errors.hpp"

namespace tlqr {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

MetricRow evaluate_fit(Method method, const TransferFit& fit,
                       const GroundTruth& truth, const Dataset& holdout,
                       QuantileLevel tau) {
  MetricRow row;
  row.method = method;
  row.mse_beta = mse_beta(fit.beta_hat, truth.beta[0]);
  row.quantile_loss = oos_quantile_loss(holdout, fit.beta_hat, tau);
  return row;
}

void attach_detection(MetricRow& row, const InformativeSet& detected,
                      const GroundTruth& truth) {
  const auto [exact, jaccard] = detection_accuracy(detected, truth.informative);
  row.detected_set = detected;
  row.detection_exact = exact;
  row.jaccard = jaccard;
}

}  // namespace

std::vector<MetricRow> run_replication(const ExperimentSpec& spec,
                                       int replication) {
  DesignSpec design = spec.design;
  design.seed =
      rng::derive_seed(spec.base_seed, static_cast<std::uint64_t>(replication),
                       static_cast<std::uint64_t>(rng::Purpose::kReplication));
  auto [collection, truth, holdout] = generate_collection(design);
  const QuantileLevel tau(design.tau);

  TransferConfig cfg = spec.transfer;
  if (!cfg.bandwidth_rule.sparsity_override)
    cfg.bandwidth_rule.sparsity_override = design.s0;  // known in synthetic runs
  if (!cfg.lambda0) {
    cfg.cv_seed = rng::derive_seed(
        design.seed, 0, static_cast<std::uint64_t>(rng::Purpose::kCvFolds));
    const std::vector<double> grid =
        cfg.cv_grid.empty()
            ? default_lambda0_grid(collection.target.n(), collection.p())
            : cfg.cv_grid;
    cfg.lambda0 = cross_validate_lambda0(collection.target, tau, grid,
                                         cfg.cv_folds, cfg.cv_seed, cfg.qr_cfg);
  }

  DetectionConfig dcfg;
  dcfg.epsilon0 = spec.epsilon0;
  dcfg.split_seed = rng::derive_seed(
      design.seed, 0, static_cast<std::uint64_t>(rng::Purpose::kSplit));
  dcfg.transfer_cfg = cfg;

  const bool wants_pseudo =
      std::count(spec.methods.begin(), spec.methods.end(), Method::Pseudo) > 0;
  const bool wants_tl = std::count(spec.methods.begin(), spec.methods.end(),
                                   Method::TransLasso) > 0;
  std::optional<DetectionScores> scores;
  if (wants_pseudo || wants_tl) scores = detection_scores(collection, dcfg);

  std::vector<MetricRow> rows;
  rows.reserve(spec.methods.size());
  for (Method method : spec.methods) {
    switch (method) {
      case Method::TargetOnly: {
        const TransferFit fit = fit_target_only(collection, cfg);
        rows.push_back(evaluate_fit(method, fit, truth, holdout, tau));
        break;
      }
      case Method::Oracle: {
        const TransferFit fit = fit_oracle(collection, truth.informative, cfg);
        rows.push_back(evaluate_fit(method, fit, truth, holdout, tau));
        break;
      }
      case Method::Naive: {
        const TransferFit fit = fit_naive(collection, cfg);
        rows.push_back(evaluate_fit(method, fit, truth, holdout, tau));
        break;
      }
      case Method::Pseudo: {
        const int m = design.num_informative;
        InformativeSet detected;
        if (m >= 1)
          detected =
              pseudo_from_scores(*scores, m, collection.num_sources()).detected;
        const TransferFit fit = fit_oracle(collection, detected, cfg);
        MetricRow row = evaluate_fit(method, fit, truth, holdout, tau);
        attach_detection(row, detected, truth);
        rows.push_back(std::move(row));
        break;
      }
      case Method::TransLasso: {
        const DetectionReport report =
            detect_from_scores(collection, *scores, dcfg);
        const TransferFit fit = fit_oracle(collection, report.detected, cfg);
        MetricRow row = evaluate_fit(method, fit, truth, holdout, tau);
        attach_detection(row, report.detected, truth);
        rows.push_back(std::move(row));
        break;
      }
    }
  }
  return rows;
}

ExperimentResults run_experiment(const ExperimentSpec& spec) {
  if (spec.replications < 1)
    throw InvalidArgument("replications must be >= 1");
  validate_design(spec.design);
  if (std::count(spec.methods.begin(), spec.methods.end(), Method::Pseudo) &&
      spec.design.num_informative > spec.design.K)
    throw InvalidArgument("pseudo method needs num_informative <= K");

  ExperimentResults results;
  results.per_replication.resize(static_cast<std::size_t>(spec.replications));

  unsigned jobs = spec.jobs > 0 ? static_cast<unsigned>(spec.jobs)
                                : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(spec.replications));

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (!failed.load()) {
      const int rep = next.fetch_add(1);
      if (rep >= spec.replications) break;
      try {
        results.per_replication[static_cast<std::size_t>(rep)] =
            run_replication(spec, rep);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
      }
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // per-method mean and (sample) standard deviation across replications
  const double R = static_cast<double>(spec.replications);
  for (std::size_t m = 0; m < spec.methods.size(); ++m) {
    MethodSummary s;
    s.method = spec.methods[m];
    double mse_sum = 0.0, ql_sum = 0.0;
    for (const auto& rep : results.per_replication) {
      mse_sum += rep[m].mse_beta;
      ql_sum += rep[m].quantile_loss;
    }
    s.mse_mean = mse_sum / R;
    s.ql_mean = ql_sum / R;
    if (spec.replications > 1) {
      double mse_ss = 0.0, ql_ss = 0.0;
      for (const auto& rep : results.per_replication) {
        mse_ss += (rep[m].mse_beta - s.mse_mean) * (rep[m].mse_beta - s.mse_mean);
        ql_ss += (rep[m].quantile_loss - s.ql_mean) *
                 (rep[m].quantile_loss - s.ql_mean);
      }
      s.mse_sd = std::sqrt(mse_ss / (R - 1.0));
      s.ql_sd = std::sqrt(ql_ss / (R - 1.0));
    }
    results.summary.push_back(s);
  }
  return results;
}

std::string format_mean_sd(double mean, double sd) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f (%.2f)", mean, sd);
  return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string spec_hash(const ExperimentSpec& spec) {
  json j;
  j["design"] = design_to_json(spec.design);
  json methods = json::array();
  for (Method m : spec.methods) methods.push_back(method_name(m));
  j["methods"] = methods;
  j["replications"] = spec.replications;
  j["base_seed"] = spec.base_seed;
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

void write_results_csv(const ExperimentSpec& spec,
                       const ExperimentResults& results, std::ostream& out) {
  out << "# tool=tlqr version=" << kToolVersion
      << " spec_hash=" << spec_hash(spec) << "\n";
  out << "method,d,num_informative,eta,error_case,replication,mse_beta,"
         "quantile_loss,detection_exact,jaccard\n";
  const std::string error_case =
      spec.design.error_case == DesignSpec::ErrorCase::Normal ? "normal"
                                                              : "cauchy";
  for (std::size_t rep = 0; rep < results.per_replication.size(); ++rep) {
    for (const MetricRow& row : results.per_replication[rep]) {
      out << method_name(row.method) << ',' << fmt_double(spec.design.d) << ','
          << spec.design.num_informative << ',' << fmt_double(spec.design.eta)
          << ',' << error_case << ',' << rep << ','
          << fmt_double(row.mse_beta) << ',' << fmt_double(row.quantile_loss)
          << ',';
      if (row.detection_exact) out << (*row.detection_exact ? 1 : 0);
      out << ',';
      if (row.jaccard) out << fmt_double(*row.jaccard);
      out << '\n';
    }
  }
}

nlohmann::json summary_json(const ExperimentSpec& spec,
                            const ExperimentResults& results) {
  json j;
  j["tool_version"] = kToolVersion;
  j["spec_hash"] = spec_hash(spec);
  j["replications"] = spec.replications;
  j["design"] = design_to_json(spec.design);
  json per_method = json::object();
  for (const MethodSummary& s : results.summary) {
    json m;
    m["mse_beta"] = {{"mean", s.mse_mean},
                     {"sd", s.mse_sd},
                     {"formatted", format_mean_sd(s.mse_mean, s.mse_sd)}};
    m["quantile_loss"] = {{"mean", s.ql_mean},
                          {"sd", s.ql_sd},
                          {"formatted", format_mean_sd(s.ql_mean, s.ql_sd)}};
    per_method[method_name(s.method)] = m;
  }
  j["summary"] = per_method;
  return j;
}

DesignSpec design_from_json(const json& j) {
  DesignSpec spec;
  const std::string kind = j.value("kind", "homogeneous");
  if (kind == "homogeneous")
    spec.kind = DesignSpec::Kind::Homogeneous;
  else if (kind == "heterogeneous")
    spec.kind = DesignSpec::Kind::Heterogeneous;
  else
    throw ParseError("design.kind must be homogeneous or heterogeneous");
  spec.p = j.value("p", 150);
  spec.n0 = j.value("n0", 150);
  spec.n_k = j.value("n_k", 150);
  spec.K = j.value("K", 20);
  spec.s0 = j.value("s0", 20);
  spec.d = j.value("d", 2.0);
  spec.num_informative = j.value("num_informative", spec.K);
  spec.eta = j.value("eta", 20.0);
  const std::string ec = j.value("error_case", "normal");
  if (ec == "normal")
    spec.error_case = DesignSpec::ErrorCase::Normal;
  else if (ec == "cauchy")
    spec.error_case = DesignSpec::ErrorCase::Cauchy;
  else
    throw ParseError("design.error_case must be normal or cauchy");
  spec.tau = j.value("tau", 0.8);
  spec.seed = j.value("seed", 0ULL);
  validate_design(spec);
  return spec;
}

nlohmann::json design_to_json(const DesignSpec& spec) {
  json j;
  j["kind"] = spec.kind == DesignSpec::Kind::Homogeneous ? "homogeneous"
                                                         : "heterogeneous";
  j["p"] = spec.p;
  j["n0"] = spec.n0;
  j["n_k"] = spec.n_k;
  j["K"] = spec.K;
  j["s0"] = spec.s0;
  j["d"] = spec.d;
  j["num_informative"] = spec.num_informative;
  j["eta"] = spec.eta;
  j["error_case"] =
      spec.error_case == DesignSpec::ErrorCase::Normal ? "normal" : "cauchy";
  j["tau"] = spec.tau;
  j["seed"] = spec.seed;
  return j;
}

ExperimentSpec experiment_spec_from_json(const json& j) {
  ExperimentSpec spec;
  if (!j.contains("design")) throw ParseError("experiment spec needs 'design'");
  spec.design = design_from_json(j.at("design"));
  spec.methods.clear();
  for (const auto& name : j.value("methods", json::array({"target_only"})))
    spec.methods.push_back(method_from_name(name.get<std::string>()));
  if (spec.methods.empty()) throw ParseError("methods must be nonempty");
  spec.replications = j.value("replications", 1);
  spec.base_seed = j.value("base_seed", 0ULL);
  spec.output_path = j.value("output_path", "");
  spec.jobs = j.value("jobs", 0);

  if (j.contains("epsilon0")) {
    const auto& e = j.at("epsilon0");
    if (e.is_number())
      spec.epsilon0 = EpsilonRule::fixed(e.get<double>());
    else if (e == "auto")
      spec.epsilon0 = EpsilonRule::automatic();
    else if (e == "auto-ceps")
      spec.epsilon0 = EpsilonRule::auto_ceps();
    else
      throw ParseError("epsilon0 must be a number, 'auto', or 'auto-ceps'");
  }

  if (j.contains("lambda0")) spec.transfer.lambda0 = j.at("lambda0").get<double>();
  if (j.contains("lambda1")) spec.transfer.lambda1 = j.at("lambda1").get<double>();
  if (j.contains("lambda2")) spec.transfer.lambda2 = j.at("lambda2").get<double>();
  if (j.contains("cv_folds")) spec.transfer.cv_folds = j.at("cv_folds").get<int>();
  if (j.contains("qr_tol")) spec.transfer.qr_cfg.tol = j.at("qr_tol").get<double>();
  if (j.contains("qr_max_iter"))
    spec.transfer.qr_cfg.max_iter = j.at("qr_max_iter").get<int>();
  if (j.contains("lasso_tol"))
    spec.transfer.lasso_cfg.tol = j.at("lasso_tol").get<double>();
  if (j.contains("lasso_max_iter"))
    spec.transfer.lasso_cfg.max_iter = j.at("lasso_max_iter").get<int>();
  return spec;
}

nlohmann::json ground_truth_to_json(const GroundTruth& truth) {
  json j;
  json betas = json::array();
  for (const CoefVector& b : truth.beta) {
    json v = json::array();
    for (Eigen::Index i = 0; i < b.beta.size(); ++i) v.push_back(b.beta[i]);
    betas.push_back(std::move(v));
  }
  j["beta"] = std::move(betas);
  j["informative"] = truth.informative.members();
  json sigmas = json::array();
  for (const CovarianceSpec& s : truth.sigma) {
    json cs;
    switch (s.kind) {
      case CovarianceSpec::Kind::Identity:
        cs["kind"] = "identity";
        break;
      case CovarianceSpec::Kind::ToeplitzGeometric:
        cs["kind"] = "toeplitz_geometric";
        cs["decay"] = s.decay;
        break;
      case CovarianceSpec::Kind::ToeplitzBanded:
        cs["kind"] = "toeplitz_banded";
        cs["band_k"] = s.band_k;
        break;
    }
    cs["p"] = s.p;
    sigmas.push_back(std::move(cs));
  }
  j["sigma"] = std::move(sigmas);
  return j;
}

}  // namespace tlqr

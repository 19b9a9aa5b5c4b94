#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tlqr/detection.hpp"
#include "tlqr/evaluation.hpp"
#include "tlqr/simulation.hpp"

namespace tlqr {

inline constexpr const char* kToolVersion = "0.1.0";

struct ExperimentSpec {
  DesignSpec design;
  std::vector<Method> methods{Method::TargetOnly};
  int replications = 1;
  std::uint64_t base_seed = 0;
  std::string output_path;
  EpsilonRule epsilon0;     // used by the detected-set method
  TransferConfig transfer;  // lambda0 left unset resolves by CV per replication
  int jobs = 0;             // 0 = all logical cores
};

struct MethodSummary {
  Method method = Method::TargetOnly;
  double mse_mean = 0.0;
  double mse_sd = 0.0;
  double ql_mean = 0.0;
  double ql_sd = 0.0;
};

struct ExperimentResults {
  std::vector<std::vector<MetricRow>> per_replication;  // [rep][method]
  std::vector<MethodSummary> summary;                   // spec method order
};

// All metric rows for one replication. Seeds derive from (base_seed,
// replication), so results do not depend on scheduling.
std::vector<MetricRow> run_replication(const ExperimentSpec& spec,
                                       int replication);

// Runs every replication on a worker pool of spec.jobs threads and
// aggregates per-method means and standard deviations.
ExperimentResults run_experiment(const ExperimentSpec& spec);

// "1.25 (0.31)": average and standard deviation at two decimals.
std::string format_mean_sd(double mean, double sd);

// Stable 64-bit content hash used to stamp outputs.
std::uint64_t fnv1a64(const std::string& bytes);

// Canonical hash of the experiment configuration (hex string).
std::string spec_hash(const ExperimentSpec& spec);

void write_results_csv(const ExperimentSpec& spec,
                       const ExperimentResults& results, std::ostream& out);

nlohmann::json summary_json(const ExperimentSpec& spec,
                            const ExperimentResults& results);

// JSON (de)serialization; keys mirror the struct fields in snake_case.
DesignSpec design_from_json(const nlohmann::json& j);
nlohmann::json design_to_json(const DesignSpec& spec);
ExperimentSpec experiment_spec_from_json(const nlohmann::json& j);
nlohmann::json ground_truth_to_json(const GroundTruth& truth);

}  // namespace tlqr

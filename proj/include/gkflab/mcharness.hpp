#pragma once

// Monte Carlo experiments that pit closed-form predictions against measured
// excursion sets, tube measures and integral-geometric averages.

#include <cstdint>
#include <functional>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gkflab/fieldsim.hpp"
#include "gkflab/geomcore.hpp"
#include "gkflab/gmf.hpp"

namespace gkflab {

enum class ExperimentKind { Ec, Volume, Sup, Kff, Poincare, Tube };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Pointwise statistic thresholded in field experiments.
enum class Statistic {
  Gaussian,   // y itself, D = [u, inf)
  ChiSquare,  // |y|^2 with k components, D = {|x| >= sqrt(u)}
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Ec;
  SpaceDescriptor space{Rectangle{{10.0, 10.0}}, 1.0};
  Statistic statistic = Statistic::Gaussian;
  int k = 1;
  std::vector<double> thresholds{1.0, 2.0, 2.5};
  int replicates = 2000;
  std::uint64_t seed = 1;
  double spacing = 0.2;
  double ell = 1.0;
  int mesh_level = 5;
  int workers = 1;
  double z_gate = 3.0;

  // sup: tune the single threshold so the heuristic predicts this tail
  std::optional<double> sup_target;
  // kff, radians
  double alpha = 0.5;
  double beta = 0.5;
  // poincare
  std::vector<int> n_list{10, 100, 1000};
  // tube: Gaussian tube of `domain`, or Euclidean tube of `space` if set
  std::optional<DomainDescriptor> domain;
  bool euclidean_tube = false;
  std::vector<double> rho_list{0.0, 0.05, 0.1};
  int j_max = 3;

  void validate() const;
  nlohmann::json echo() const;
};

struct CaseRecord {
  std::string label;
  double predicted = 0.0;
  double empirical_mean = 0.0;
  double stderr_ = 0.0;
  double z = 0.0;
  int replicates = 0;
  double wall_time = 0.0;  // seconds spent on the replicates behind this case
  double gate = 0.0;       // |z| bound; 0 for cases judged by `rule`
  double slack = 0.0;      // extra allowed |difference| (series truncation)
  bool passed = true;
  std::string rule;        // pass rule in words when gate is 0
  nlohmann::json inputs;   // what the prediction was built from
};

struct ExperimentReport {
  std::string experiment;
  std::vector<CaseRecord> cases;
  std::uint64_t seed = 0;
  nlohmann::json config_echo;
  bool passed = true;

  std::string verdict() const { return passed ? "PASS" : "FAIL"; }
  const CaseRecord& find(const std::string& label) const;
};

/// z = (mean - predicted)/stderr. With stderr 0 it is 0 on exact agreement
/// and +-inf otherwise.
double z_score(double mean, double predicted, double stderr_);

/// Fills z and passed from the record's gate and slack.
void judge(CaseRecord& c);

nlohmann::json to_json(const ExperimentReport& report);
/// Header `label,predicted,empirical_mean,stderr,z,replicates,wall_time,passed`.
std::string to_csv(const ExperimentReport& report);

ExperimentReport run_ec_experiment(const ExperimentConfig& cfg);
ExperimentReport run_volume_experiment(const ExperimentConfig& cfg);
ExperimentReport run_sup_experiment(const ExperimentConfig& cfg);

/// Caps of angular radii alpha, beta (radians, in (0, pi/2]) on the unit
/// sphere, one Haar rotation per replicate.
ExperimentReport run_kff_sphere_experiment(double alpha, double beta, int reps,
                                           std::uint64_t seed, int workers = 1,
                                           double z_gate = 3.0);

ExperimentReport run_poincare_experiment(const std::vector<int>& n_list, int k,
                                         std::shared_ptr<const SphereMesh> mesh,
                                         int reps, std::uint64_t seed,
                                         int workers = 1, double z_gate = 3.0);

/// Gauss measure of the rho-tube around d vs its truncated series; `samples`
/// Gaussian draws per rho.
ExperimentReport run_tube_experiment(const DomainDescriptor& d,
                                     const std::vector<double>& rho_list, int j_max,
                                     std::int64_t samples, std::uint64_t seed,
                                     int workers = 1, double z_gate = 3.0);

/// Euclidean volume of the rho-tube around a rectangle or ball vs Steiner.
ExperimentReport run_euclid_tube_experiment(const SpaceDescriptor& space,
                                            const std::vector<double>& rho_list,
                                            std::int64_t samples, std::uint64_t seed,
                                            int workers = 1, double z_gate = 3.0);

/// Dispatches on cfg.kind.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Pieces exposed for testing.

/// Area of the intersection of two caps on the unit sphere whose centres are
/// `d` apart.
double cap_intersection_area(double a, double b, double d);

/// CDF of sqrt(n) x_1 for x uniform on the unit sphere in R^n.
double poincare_marginal_cdf(int n, double x);
/// sup_x |F_n(x) - Phi(x)|.
double poincare_marginal_ks(int n);

/// One-sample Kolmogorov-Smirnov distance of `sample` to `cdf`.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);
/// Asymptotic p-value of distance d with m observations.
double ks_pvalue(double d, std::size_t m);

}  // namespace gkflab

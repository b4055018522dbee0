// One line per acceptance criterion; exits nonzero if any criterion fails.
// Every run uses master seed 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gkflab/excursion.hpp"
#include "gkflab/geomcore.hpp"
#include "gkflab/gmf.hpp"
#include "gkflab/mcharness.hpp"
#include "oracles.hpp"

using namespace gkflab;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kSeed = 1;

struct Outcome {
  bool passed = true;
  std::string detail;
};

double max_abs_z(const ExperimentReport& r) {
  double m = 0.0;
  for (const auto& c : r.cases) {
    if (c.gate > 0.0) m = std::max(m, std::abs(c.z));
  }
  return m;
}

std::string zs(const ExperimentReport& r) {
  std::string s;
  for (const auto& c : r.cases) {
    if (!s.empty()) s += ' ';
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s:z=%+.2f", c.label.c_str(), c.z);
    s += buf;
  }
  return s;
}

ExperimentConfig rect_cfg(ExperimentKind kind, std::vector<double> u) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.space = {Rectangle{{10.0, 10.0}}, 1.0};
  cfg.ell = 1.0;
  cfg.spacing = 0.2;
  cfg.thresholds = std::move(u);
  cfg.replicates = 2000;
  cfg.seed = kSeed;
  cfg.workers = 0;
  return cfg;
}

Outcome ec_rectangle() {
  const auto r = run_ec_experiment(rect_cfg(ExperimentKind::Ec, {1.0, 2.0, 2.5}));
  return {r.passed, zs(r)};
}

Outcome ec_sphere() {
  ExperimentConfig cfg = rect_cfg(ExperimentKind::Ec, {0.5, 1.0, 2.0});
  cfg.space = {Sphere2{1.0}, 1.0};
  cfg.mesh_level = 5;
  cfg.replicates = 5000;
  const auto r = run_ec_experiment(cfg);
  return {r.passed, zs(r)};
}

Outcome chi_square() {
  const std::vector<double> u{2 * std::log(10.0), 2 * std::log(100.0)};
  ExperimentConfig cfg = rect_cfg(ExperimentKind::Ec, u);
  cfg.statistic = Statistic::ChiSquare;
  cfg.k = 2;
  const auto ec = run_ec_experiment(cfg);
  cfg.kind = ExperimentKind::Volume;
  const auto vol = run_volume_experiment(cfg);
  return {ec.passed && vol.passed, "ec " + zs(ec) + " | volume " + zs(vol)};
}

Outcome top_order() {
  const auto r = run_volume_experiment(rect_cfg(ExperimentKind::Volume, {-1.0, 0.0, 1.0, 2.0}));
  return {r.passed, zs(r)};
}

Outcome tube_formula() {
  bool ok = true;
  std::string detail;
  GmfNumericSettings s;
  s.samples = 40'000'000;
  s.seed = kSeed;
  s.workers = 0;
  for (double u : {0.0, 1.0, 2.0}) {
    const auto num = gmf_numeric(DomainDescriptor::half_line(u), 2, s);
    for (int j = 0; j <= 2; ++j) {
      const double se = (*num.errors)[j];
      const double z = (num.values[j] - gmf_halfline(j, u)) / se;
      ok = ok && std::abs(z) <= 3.0;
      char buf[64];
      std::snprintf(buf, sizeof buf, "u=%g M%d z=%+.2f ", u, j, z);
      detail += buf;
    }
  }
  const auto e = run_euclid_tube_experiment({Rectangle{{3.0, 4.0}}, 1.0}, {0.5}, 4'000'000, kSeed, 0);
  const auto& c = e.cases.front();
  ok = ok && e.passed && std::abs(c.predicted - 19.785398) < 1e-6;
  char buf[128];
  std::snprintf(buf, sizeof buf, "| rect[3,4] rho=0.5 mc=%.4f+-%.4f exact=%.6f", c.empirical_mean,
                c.stderr_, c.predicted);
  return {ok, detail + buf};
}

Outcome kappa_roundtrip() {
  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<int> dim(0, 6);
  std::uniform_real_distribution<double> val(-10.0, 10.0);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> v(static_cast<std::size_t>(dim(rng)) + 1);
    for (double& x : v) x = val(rng);
    const LkVector lk(v);
    for (double kappa : {-2.0, 0.5, 1.0, 10.0}) {
      const LkVector back = from_kappa(to_kappa(lk, kappa), kappa);
      for (int j = 0; j <= lk.dim(); ++j) {
        worst = std::max(worst, std::abs(back[j] - v[j]) / std::max(std::abs(v[j]), 1e-300));
      }
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max relative error %.3g", worst);
  return {worst <= 1e-10, buf};
}

Outcome spherical_kff() {
  bool ok = true;
  std::string detail;
  const double deg = kPi / 180.0;
  for (auto [a, b] : {std::pair{30.0, 30.0}, std::pair{45.0, 60.0}, std::pair{90.0, 90.0}}) {
    const auto r = run_kff_sphere_experiment(a * deg, b * deg, 50000, kSeed, 0);
    ok = ok && r.passed;
    const auto& lhs = r.find("lk0_kappa");
    char buf[160];
    std::snprintf(buf, sizeof buf, "(%g,%g) lhs=%.4f rhs=%.4f z=%+.2f; ", a, b, lhs.empirical_mean,
                  lhs.predicted, lhs.z);
    detail += buf;
    if (a == 90.0) {
      const auto& chi = r.find("chi");
      const bool exact = std::abs(chi.empirical_mean - 4 * kPi) <= std::max(chi.stderr_, 1e-9);
      ok = ok && exact;
      std::snprintf(buf, sizeof buf, "hemisphere chi integral %.6f", chi.empirical_mean);
      detail += buf;
    }
  }
  return {ok, detail};
}

Outcome poincare() {
  const auto mesh = std::make_shared<const SphereMesh>(make_icosphere(5));
  const auto r = run_poincare_experiment({10, 100, 1000}, 1, mesh, 5000, kSeed, 0);
  char buf[200];
  std::snprintf(buf, sizeof buf, "exact ks %.3g > %.3g > %.3g, max |z| %.2f, ec(n=1000) z=%+.2f",
                r.find("n=10 marginal_ks").predicted, r.find("n=100 marginal_ks").predicted,
                r.find("n=1000 marginal_ks").predicted, max_abs_z(r),
                r.find("n=1000 ec u=1.000000").z);
  return {r.passed, buf};
}

Outcome ec_heuristic() {
  ExperimentConfig cfg = rect_cfg(ExperimentKind::Sup, {});
  cfg.sup_target = 0.05;
  cfg.replicates = 20000;
  cfg.z_gate = 4.0;
  const auto r = run_sup_experiment(cfg);
  const auto& c = r.cases.front();
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s predicted %.4f empirical %.4f+-%.4f z=%+.2f", c.label.c_str(),
                c.predicted, c.empirical_mean, c.stderr_, c.z);
  return {r.passed, buf};
}

Outcome topology_oracle() {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> density(0.2, 0.9);
  int agree = 0;
  const GridSpec grid{{7, 7}, 1.0, {}};
  for (int rep = 0; rep < 500; ++rep) {
    std::bernoulli_distribution coin(density(rng));
    std::vector<std::uint8_t> a(64);
    for (auto& x : a) x = coin(rng);
    agree += euler_char_grid(grid_mask(grid, a)) == oracle::betti_grid2(a, 8, 8).euler();
  }
  return {agree == 500, std::to_string(agree) + "/500 masks agree"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"Euler characteristic, 10x10 rectangle", ec_rectangle},
      {"Euler characteristic, unit sphere", ec_sphere},
      {"chi-square field, EC and volume", chi_square},
      {"top-order curvature (volume)", top_order},
      {"Gaussian and Euclidean tube formulas", tube_formula},
      {"kappa conversion roundtrip", kappa_roundtrip},
      {"kinematic formula on the sphere", spherical_kff},
      {"Poincare limit", poincare},
      {"EC heuristic for the supremum", ec_heuristic},
      {"8x8 topology oracle", topology_oracle},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2d %s (%.1fs): %s\n", o.passed ? "PASS" : "FAIL", index, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.passed;
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}

// Copyright 2026 The qtrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "qtrace/cli/app.hpp"
#include "qtrace/gst.hpp"
#include "qtrace/ht.hpp"
#include "qtrace/noise_bounds.hpp"
#include "qtrace/series.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace qtrace;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out{false, ""};
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= budget_s;
  const bool pass = out.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s [%d] %s: %s; %.2fs of %.0fs%s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              out.detail.c_str(), secs, budget_s, in_time ? "" : " (over budget)");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

EnsembleSpec model() { return cli::parse_config(cli::kReferenceConfig).ensemble(); }

// 1 ----------------------------------------------------------------------
Outcome table2() {
  const auto e = model();
  const double expected[] = {0.650, 0.486, 0.375};
  std::ostringstream d;
  bool ok = true;
  for (int m = 2; m <= 4; ++m) {
    const double o = exact_power_trace(e, m);
    const double h = ht::estimate_power_trace_enumerate(e, m - 1).value;
    const double g = gst::estimate_power_trace(e, m, {}).value;
    const double want = expected[m - 2];
    ok = ok && round3(o) == want && round3(h) == want && round3(g) == want;
    d << "m=" << m << " oracle/ht/gst=" << fmt("%.5f", o) << "/" << fmt("%.5f", h) << "/" << fmt("%.5f", g)
      << " vs " << fmt("%.3f", want) << (m < 4 ? ", " : "");
  }
  return {ok, d.str()};
}

// 2 ----------------------------------------------------------------------
Outcome cross_method() {
  const auto e = model();
  const double g2 = gst::estimate_g_power_trace(e, 2, {}).value;
  const double identity = 8.0 - 4.0 + 4.0 * exact_power_trace(e, 2);
  const bool ok = std::abs(g2 - 6.600) <= 1e-3 && std::abs(g2 - identity) <= 1e-3;
  return {ok, "gst Tr{G^2}=" + fmt("%.6f", g2) + ", 2^n-4+4Tr{rho^2}=" + fmt("%.6f", identity) + ", tol 1e-3"};
}

// 3 ----------------------------------------------------------------------
Outcome entropy_series() {
  const auto e = model();
  std::vector<TraceEstimate> gk;
  for (int k = 0; k <= 9; ++k) gk.push_back({exact_g_power_trace(e, k), 0.0, 1, EstimateMode::kOracle, 0});
  const double exact = exact_entropy_trace(e);
  const double v2 = series::evaluate_series(series::entropy_weights(2), gk).value;
  const double v8 = series::evaluate_series(series::entropy_weights(8), gk).value;
  const double re2 = std::abs(v2 - exact) / std::abs(exact);
  const double re8 = std::abs(v8 - exact) / std::abs(exact);
  const bool ok = round3(exact) == -0.600 && re8 <= 0.025 && re8 < re2;
  return {ok, "exact=" + fmt("%.6f", exact) + ", order 2: " + fmt("%.6f", v2) + " (" + fmt("%.3f%%", 100 * re2) +
                  "), order 8: " + fmt("%.6f", v8) + " (" + fmt("%.3f%%", 100 * re8) + "), need <= 2.5% and decreasing"};
}

// 4 ----------------------------------------------------------------------
Outcome ht_soundness() {
  const auto e = model();
  ht::McOptions o;
  o.mode = ht::McMode::kShots;
  o.shots_per_trial = 1;
  o.trials = 100'000;
  int covered = 0;
  double se_small = 0.0;
  for (int r = 0; r < 50; ++r) {
    o.seed = derive_seed(4000, static_cast<std::uint64_t>(r));
    const auto est = ht::estimate_power_trace_mc(e, 1, o);
    covered += std::abs(est.value - 0.650) <= 3.0 * est.std_error;
    se_small += est.std_error / 50.0;
  }
  o.trials = 400'000;
  double se_big = 0.0;
  for (int r = 0; r < 10; ++r) {
    o.seed = derive_seed(5000, static_cast<std::uint64_t>(r));
    se_big += ht::estimate_power_trace_mc(e, 1, o).std_error / 10.0;
  }
  const double ratio = se_big / se_small;
  const bool ok = covered >= 46 && std::abs(ratio / 0.5 - 1.0) <= 0.2;
  return {ok, std::to_string(covered) + "/50 intervals cover 0.650 (need >= 46), stderr ratio 4e5/1e5 = " +
                  fmt("%.4f", ratio) + " (need 0.5 +- 20%)"};
}

// 5 ----------------------------------------------------------------------
Outcome restriction_oracle() {
  Rng rng(5555);
  std::uniform_int_distribution<int> n_dist(2, 6), a_dist(1, 3), k_dist(1, 4);
  double worst = 0.0;
  int truncated = 0, checked = 0;
  for (int c = 0; c < 200; ++c) {
    const auto e = fixtures::random_ensemble(n_dist(rng), a_dist(rng), rng);
    const int k = k_dist(rng);
    std::vector<std::size_t> idx;
    for (int t = 0; t < k; ++t) idx.push_back(sample_component(e, rng));
    const auto q = Combination::from_indices(e, idx);
    gst::GstOptions opt;
    opt.epsilon = 1e-10;
    const auto ct = gst::combination_trace(e, q, opt, rng);
    if (ct.truncated) {
      ++truncated;
      continue;
    }
    ++checked;
    worst = std::max(worst, std::abs(ct.value - exact_combination_trace(e, q).real()));
  }
  return {worst <= 1e-6, std::to_string(checked) + " non-truncated cases, " + std::to_string(truncated) +
                             " truncated, max |value - Re exact| = " + fmt("%.3e", worst) + " (tol 1e-6)"};
}

// 6 ----------------------------------------------------------------------
Outcome theta_degeneracy() {
  Rng rng(6666);
  std::vector<double> at_pi, at_half;
  // In C^2 every two-dimensional subspace is the whole space, so draw n >= 2.
  for (int c = 0; c < 50; ++c) {
    const int n = 2 + c % 3;
    const std::vector<StateVector> a{fixtures::random_state(n, rng), fixtures::random_state(n, rng)};
    at_pi.push_back(gst::min_eigenvalue(gst::gram_matrix(gst::build_operator_basis(a, pi))));
    at_half.push_back(gst::min_eigenvalue(gst::gram_matrix(gst::build_operator_basis(a, pi / 2))));
  }
  auto sorted = at_half;
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[24] + sorted[25]);
  const double worst_pi = *std::max_element(at_pi.begin(), at_pi.end());
  const double least_half = sorted.front();
  const bool ok = worst_pi < 1e-10 && least_half > 1e-6 * median;
  return {ok, "max min-eig at theta=pi " + fmt("%.3e", worst_pi) + " (need < 1e-10), min min-eig at pi/2 " +
                  fmt("%.3e", least_half) + " vs 1e-6*median " + fmt("%.3e", 1e-6 * median)};
}

// 7 ----------------------------------------------------------------------
Outcome truncation() {
  const double per_qubit = std::cbrt(1.0 - 1e-8);
  const EnsembleSpec e(3, {{0.5, ProductGate::identity(3)},
                           {0.5, ProductGate::uniform(3, {2.0 * std::acos(per_qubit), 0, 0})}});
  const double ov = std::abs(overlap(e.state(0), e.state(1)));
  const auto q = Combination::from_indices(e, {0, 1});
  const auto b = gst::build_subspace(e, q, 1e-4);
  gst::EstimatorOptions opt;
  opt.gst.epsilon = 1e-4;
  const double g2 = gst::estimate_g_power_trace(e, 2, opt).value;
  const double bias = std::abs(g2 - exact_g_power_trace(e, 2));
  const double estimate = truncation_error_estimate(2, static_cast<int>(b.d()), 1e-4,
                                                    std::numeric_limits<double>::infinity());
  const bool ok = b.d() == 1 && b.truncated() && bias < estimate;
  return {ok, "overlap " + fmt("%.10f", ov) + ", d=" + std::to_string(b.d()) + " of 2, Tr{G^2} bias " +
                  fmt("%.3e", bias) + " < estimate " + fmt("%.3e", estimate)};
}

// 8 ----------------------------------------------------------------------
Outcome hoeffding() {
  const int d = 2;
  const double eps = 0.02, delta = 0.05;
  const auto shots = shots_for_accuracy(d, eps, delta);
  const auto e = model();
  const auto ob = gst::extend_operator_basis(std::vector<StateVector>{e.state(0), e.state(3)}, gst::kDefaultTheta);
  const double exact = gst::gram_matrix(ob)(0, 2);
  Rng rng(8888);
  int violations = 0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) {
    const double v = gst::detail::measure_entry(exact, gst::Measurement::with_shots(shots), rng);
    violations += std::abs(v - exact) > d * d * eps;
  }
  const double freq = violations / double(reps);
  const double limit = delta + 3.0 * std::sqrt(delta * (1 - delta) / reps);
  return {freq < limit, "N=" + std::to_string(shots) + ", entry " + fmt("%.4f", exact) + ", violation rate " +
                            fmt("%.4f", freq) + " < " + fmt("%.4f", limit)};
}

// 9 ----------------------------------------------------------------------
Outcome noise_band() {
  const auto e = model();
  const NoiseConfig noise;
  double ht_worst = 0.0, gst_worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const auto seed = derive_seed(9000, static_cast<std::uint64_t>(s));
    ht::McOptions o;
    o.trials = 100'000;
    o.mode = ht::McMode::kShots;
    o.seed = seed;
    const auto clean_ht = ht::estimate_power_trace_mc(e, 1, o);
    o.ht_sigma = noise.ht_sigma;
    const auto noisy_ht = ht::estimate_power_trace_mc(e, 1, o);
    ht_worst = std::max(ht_worst, std::abs(noisy_ht.value - 0.650) / (5.0 * clean_ht.std_error));

    gst::EstimatorOptions g;
    g.strategy = gst::Strategy::kMonteCarlo;
    g.budget = 2000;
    g.seed = seed;
    const auto clean_gst = gst::estimate_power_trace(e, 2, g);
    g.gst.measurement = gst::Measurement::gaussian(noise.gst_sigma);
    const auto noisy_gst = gst::estimate_power_trace(e, 2, g);
    gst_worst = std::max(gst_worst, std::abs(noisy_gst.value - 0.650) / (5.0 * clean_gst.std_error));
  }
  const bool ok = ht_worst <= 1.0 && gst_worst <= 1.0;
  return {ok, "max |noisy - 0.650| / (5 clean stderr): ht " + fmt("%.3f", ht_worst) + ", gst " +
                  fmt("%.3f", gst_worst) + " (need <= 1)"};
}

// 10 ---------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("qtrace_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto cfg = dir / "sweep.json";
  std::ofstream(cfg) << R"({"schema": 1, "n_qubits": 3, "seed": 99,
    "components": [{"prob": 0.25, "angles": [0.29, 0.07, 0.11]}, {"prob": 0.75, "angles": [0.46, 0.62, 0.82]}],
    "params": {"strategy": "mc", "mode": "shots", "trials": 5000, "ht_sigma": 0.01, "gst_sigma": 0.0001},
    "sweep": {"parameter": "gst_sigma", "values": [0, 0.0001, 0.001], "estimator": "gst", "power": 2}})";
  const auto gst_cfg = dir / "gst.json";
  {
    std::string text = cli::kReferenceConfig;
    text.replace(text.find("\"order\": 8"), 10, "\"order\": 8, \"epsilon_trunc\": 0.001");
    std::ofstream(gst_cfg) << text;
  }
  const std::vector<std::string> runs = {
      "ht --power 2 --power 3 --strategy mc --mode shots --trials 40000 --shots 3 --seed 7",
      "gst --config " + gst_cfg.string() + " --power 2 --strategy mc --mode shots --trials 1500 --shots 5000 --seed 7 --format json",
      "gst --config " + gst_cfg.string() + " --power 3 --strategy enumerate --mode gaussian --seed 7",
      "entropy --estimator ht --strategy mc --mode exact --order 3 --trials 20000 --seed 7",
      "sweep --config " + cfg.string(),
  };
  int identical = 0;
  std::string detail;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "8", "1", "8"}) {
      const auto out = dir / ("run" + std::to_string(i) + "_" + std::to_string(outputs.size()));
      const std::string cmd = std::string("QTRACE_THREADS=") + threads + " \"" + QTRACE_CLI_PATH + "\" " + runs[i] +
                              " --output " + out.string() + " 2>&1";
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + runs[i]};
      outputs.push_back(slurp(out));
    }
    const bool same = !outputs[0].empty() && std::all_of(outputs.begin(), outputs.end(),
                                                         [&](const std::string& s) { return s == outputs[0]; });
    identical += same;
    if (!same) detail += " differs: " + runs[i] + ";";
  }
  fs::remove_all(dir);
  return {identical == static_cast<int>(runs.size()),
          std::to_string(identical) + "/" + std::to_string(runs.size()) +
              " configs byte-identical over 2 runs x {1, 8} workers" + detail};
}

}  // namespace

int main() {
  criterion(1, "Tr{rho^m} reproduction, m=2..4, three exact methods", 10, table2);
  criterion(2, "GST Tr{G^2} against 2^n-4+4Tr{rho^2}", 5, cross_method);
  criterion(3, "entropy series at order 8 within 2.5%", 5, entropy_series);
  criterion(4, "HT shot-mode coverage and 1/sqrt(N) scaling", 120, ht_soundness);
  criterion(5, "GST combination trace against restriction oracle", 120, restriction_oracle);
  criterion(6, "operator-basis Gram degeneracy at theta=pi", 30, theta_degeneracy);
  criterion(7, "truncation of a near-duplicate state", 30, truncation);
  criterion(8, "Hoeffding shot sizing coverage", 120, hoeffding);
  criterion(9, "noise-injected estimates stay in the clean band", 120, noise_band);
  criterion(10, "byte-identical output across worker counts", 60, determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

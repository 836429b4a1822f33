#include "harness/studies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "harness/scene.hpp"
#include "linalg/svd.hpp"
#include "obliv/cleartext.hpp"
#include "solver/iteration.hpp"
#include "solver/solver.hpp"

namespace snail::harness {

namespace {

constexpr size_t kBatteryN[3] = {6, 8, 12};

}  // namespace

std::vector<Matrix<double>> sample_lm_matrices(size_t count, uint64_t rng_seed, const solver::SolverConfig& cfg) {
  std::vector<Matrix<double>> out;
  out.reserve(count);
  for (uint64_t s = 0; out.size() < count; ++s) {
    const SyntheticScene sc = gen_scene(kBatteryN[s % 3], 0, rng_seed + s);
    geometry::PoseT<double> x = perturbed_start(sc);
    for (int it = 0; it < cfg.max_outer && out.size() < count; ++it) {
      const auto& c = sc.correspondences;
      const auto r = geometry::residuals(x, sc.intrinsics, c);
      Matrix<double> a = solver::normal_matrix(geometry::numeric_jacobian(x, sc.intrinsics, c, cfg.epsilon, r));
      for (size_t i = 0; i < a.rows(); ++i) a(i, i) += cfg.lambda * a(i, i);
      out.push_back(std::move(a));
      const auto step = solver::iteration<double>(c, x, sc.intrinsics, cfg);
      x = step.pose;
      if (step.squared_error <= cfg.convergence_c) break;
    }
  }
  return out;
}

std::vector<double> superdiag_profile(const Matrix<double>& a, int max_sweeps) {
  auto b = linalg::householder_bidiagonalize(a);
  std::vector<double> out;
  for (int s = 0; s < max_sweeps; ++s) {
    linalg::dk_qr_sweep(b);
    double e = 0, d = 0;
    for (double v : b.superdiag) e = std::max(e, std::abs(v));
    for (double v : b.diag) d = std::max(d, std::abs(v));
    out.push_back(d > 0 ? e / d : 0);
  }
  return out;
}

bool near_degenerate(const Matrix<double>& a, double tol) {
  const auto b = linalg::householder_bidiagonalize(a);
  double scale = 0;
  for (double v : b.diag) scale = std::max(scale, std::abs(v));
  for (double v : b.superdiag) scale = std::max(scale, std::abs(v));
  for (size_t i = 0; i < b.superdiag.size(); ++i) {
    const double e = std::abs(b.superdiag[i]);
    if (e <= tol * scale) continue;
    for (size_t j : {i, i + 1})
      if (std::abs(std::abs(b.diag[j]) - e) <= tol * scale) return true;
  }
  return false;
}

const SweepRow* SweepStudy::at(int sweeps) const {
  for (const auto& r : rows)
    if (r.sweeps == sweeps) return &r;
  return nullptr;
}

SweepStudy sweep_study(size_t samples, uint64_t rng_seed, int min_sweeps, int max_sweeps) {
  if (samples < 1000) throw solver::ConfigError("the sweep study needs at least 1000 samples");
  if (min_sweeps < 1 || max_sweeps < min_sweeps) throw solver::ConfigError("bad sweep range");
  SweepStudy st;
  st.samples = samples;
  std::vector<uint64_t> hits(max_sweeps + 1, 0);
  for (const auto& a : sample_lm_matrices(samples, rng_seed)) {
    const auto prof = superdiag_profile(a, max_sweeps);
    for (int s = 1; s <= max_sweeps; ++s)
      if (prof[s - 1] < st.tolerance) ++hits[s];
    if (near_degenerate(a, st.tolerance)) ++st.degenerate;
  }
  for (int s = min_sweeps; s <= max_sweeps; ++s)
    st.rows.push_back({s, hits[s], samples ? static_cast<double>(hits[s]) / samples : 0});
  return st;
}

std::string sweep_csv(const SweepStudy& s) {
  std::string out = "sweeps,samples,converged,rate,degenerate\n";
  char buf[128];
  for (const auto& r : s.rows) {
    std::snprintf(buf, sizeof buf, "%d,%zu,%llu,%.6f,%llu\n", r.sweeps, s.samples,
                  static_cast<unsigned long long>(r.converged), r.rate, static_cast<unsigned long long>(s.degenerate));
    out += buf;
  }
  return out;
}

std::vector<FormatRow> fixed_vs_float(size_t samples, uint64_t rng_seed, const solver::SolverConfig& base,
                                      std::vector<obliv::NumericFormat> formats) {
  if (samples < 100) throw solver::ConfigError("the format study needs at least 100 samples");
  if (formats.empty()) formats = {obliv::NumericFormat::float32(), obliv::NumericFormat::fixed64()};
  std::vector<FormatRow> rows;
  for (const auto& fmt : formats) {
    FormatRow row;
    row.format = fmt;
    const auto add = obliv::gate_cost(obliv::OpKind::kAdd, fmt);
    const auto mul = obliv::gate_cost(obliv::OpKind::kMul, fmt);
    row.add_and = add.and_gates;
    row.add_xor = add.xor_gates;
    row.mul_and = mul.and_gates;
    row.mul_xor = mul.xor_gates;
    solver::SolverConfig cfg = base;
    cfg.format = fmt;
    for (size_t s = 0; s < samples; ++s) {
      const SyntheticScene sc = gen_scene(kBatteryN[s % 3], 0, rng_seed + s);
      const auto chain = solver::sil_localize(sc.correspondences, sc.intrinsics, perturbed_start(sc), cfg);
      ++row.samples;
      bool overflow = false, small = false;
      for (const auto& st : chain.steps) {
        overflow |= st.overflow;
        small |= st.squared_error <= cfg.convergence_c;
      }
      row.overflowed += overflow;
      row.converged_ignoring_overflow += small;
      if (chain.converged) {
        ++row.converged;
        const PoseError e = pose_error(chain.pose, sc.ground_truth);
        row.accurate += e.translation < 1e-3 && e.rotation < 1e-3;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::string formats_csv(const std::vector<FormatRow>& rows) {
  std::string out =
      "format,add_and,add_xor,mul_and,mul_xor,samples,converged,rate,converged_ignoring_overflow,overflowed,accurate\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%llu,%llu,%llu,%llu,%zu,%zu,%.4f,%zu,%zu,%zu\n", r.format.name().c_str(),
                  static_cast<unsigned long long>(r.add_and), static_cast<unsigned long long>(r.add_xor),
                  static_cast<unsigned long long>(r.mul_and), static_cast<unsigned long long>(r.mul_xor), r.samples,
                  r.converged, r.rate(), r.converged_ignoring_overflow, r.overflowed, r.accurate);
    out += buf;
  }
  return out;
}

std::vector<double> transcript_features(const std::vector<protocol::ServerEntry>& t) {
  // Message count, total bytes, then count and bytes per (observer, peer,
  // direction, type).
  constexpr int kTypes = 9;
  std::vector<double> f(2 + 2 * 4 * 4 * 2 * kTypes, 0.0);
  for (const auto& e : t) {
    f[0] += 1;
    f[1] += static_cast<double>(e.entry.bytes);
    const size_t slot = ((static_cast<size_t>(e.observer) * 4 + static_cast<size_t>(e.peer)) * 2 + e.entry.sent) *
                            kTypes +
                        (static_cast<size_t>(e.entry.type) - 1);
    f[2 + 2 * slot] += 1;
    f[3 + 2 * slot] += static_cast<double>(e.entry.bytes);
  }
  return f;
}

namespace {

struct Stump {
  size_t feature = 0;
  double threshold = 0;
  bool above_is_positive = true;
  int constant = -1;  // >= 0: predict this class for everything

  int predict(const std::vector<double>& x) const {
    if (constant >= 0) return constant;
    return (x[feature] > threshold) == above_is_positive ? 1 : 0;
  }
};

double balanced_accuracy(const std::vector<int>& truth, const std::vector<int>& pred) {
  double tp = 0, p = 0, tn = 0, nn = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      ++p;
      tp += pred[i] == 1;
    } else {
      ++nn;
      tn += pred[i] == 0;
    }
  }
  const double tpr = p ? tp / p : 0.5, tnr = nn ? tn / nn : 0.5;
  return 0.5 * (tpr + tnr);
}

Stump train(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys) {
  size_t pos = 0;
  for (int y : ys) pos += y;
  Stump best;
  best.constant = 2 * pos > ys.size() ? 1 : 0;
  double best_ba = 0.5;
  const size_t nf = xs.empty() ? 0 : xs[0].size();
  std::vector<int> pred(ys.size());
  for (size_t f = 0; f < nf; ++f) {
    std::set<double> vals;
    for (const auto& x : xs) vals.insert(x[f]);
    if (vals.size() < 2) continue;
    std::vector<double> v(vals.begin(), vals.end());
    for (size_t i = 0; i + 1 < v.size(); ++i) {
      const double thr = 0.5 * (v[i] + v[i + 1]);
      for (bool above : {true, false}) {
        for (size_t k = 0; k < xs.size(); ++k) pred[k] = (xs[k][f] > thr) == above ? 1 : 0;
        const double ba = balanced_accuracy(ys, pred);
        if (ba > best_ba) {
          best_ba = ba;
          best = {f, thr, above, -1};
        }
      }
    }
  }
  return best;
}

}  // namespace

DistinguisherResult frame_boundary_distinguisher(const std::vector<std::vector<double>>& features,
                                                 const std::vector<int>& labels) {
  if (features.size() != labels.size()) throw solver::ConfigError("feature and label counts differ");
  DistinguisherResult r;
  r.samples = labels.size();
  for (int y : labels) r.positives += y != 0;
  if (labels.size() < 2) return r;
  std::vector<int> pred(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    for (size_t j = 0; j < labels.size(); ++j)
      if (j != i) {
        xs.push_back(features[j]);
        ys.push_back(labels[j] != 0);
      }
    pred[i] = train(xs, ys).predict(features[i]);
  }
  std::vector<int> truth(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) truth[i] = labels[i] != 0;
  r.balanced_accuracy = balanced_accuracy(truth, pred);
  return r;
}

}  // namespace snail::harness

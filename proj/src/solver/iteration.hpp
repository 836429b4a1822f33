#pragma once

#include <vector>

#include "geometry/camera.hpp"
#include "linalg/svd.hpp"
#include "solver/config.hpp"

namespace snail::solver {

template <class T>
struct IterationOutput {
  geometry::PoseT<T> pose;  // updated pose
  T squared_error;          // error at the pose the step started from
  std::vector<T> sigma;     // singular values of the decomposed system
};

// Symmetric JᵀJ: the upper triangle is computed and mirrored.
template <class T>
Matrix<T> normal_matrix(const Matrix<T>& j) {
  const size_t n = j.cols();
  Matrix<T> a(n, n);
  for (size_t r = 0; r < n; ++r)
    for (size_t c = r; c < n; ++c) {
      T s = j(0, r) * j(0, c);
      for (size_t i = 1; i < j.rows(); ++i) s = s + j(i, r) * j(i, c);
      a(r, c) = s;
      a(c, r) = s;
    }
  return a;
}

// One loop body of the pose refinement: project, differentiate, solve, update.
template <class T>
IterationOutput<T> iteration(const geometry::CorrespondencesT<T>& c, const geometry::PoseT<T>& x,
                             const geometry::Intrinsics& k, const SolverConfig& cfg) {
  const std::vector<T> r = geometry::residuals(x, k, c);
  const T err = geometry::squared_error(r);
  const Matrix<T> j = geometry::numeric_jacobian(x, k, c, cfg.epsilon, r);
  linalg::SvdResult<T> svd;
  std::vector<T> dx;
  if (cfg.algorithm == Algorithm::kLM) {
    Matrix<T> a = normal_matrix(j);
    for (size_t i = 0; i < a.rows(); ++i) a(i, i) = a(i, i) + T(cfg.lambda) * a(i, i);
    const std::vector<T> g = linalg::matvec_transposed<T>(j, r);
    svd = linalg::svd_fixed(a, cfg.svd_sweeps);
    dx = linalg::apply_pseudo_inverse<T>(svd, g, linalg::kPinvTau);
  } else {
    svd = linalg::svd_fixed(j, cfg.svd_sweeps);
    dx = linalg::apply_pseudo_inverse<T>(svd, r, linalg::kPinvTau);
  }
  // The residual is projected minus measured and J its derivative, so the
  // descent direction is −dx.
  IterationOutput<T> out{x, err, svd.sigma};
  for (int d = 0; d < 6; ++d) out.pose[d] = x[d] - dx[d];
  return out;
}

}  // namespace snail::solver

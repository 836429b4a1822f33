#pragma once

// Oblivious dense linear algebra. Every routine runs a fixed sequence of
// operations determined by the matrix dimensions and public counts; all
// data-dependent choices go through select.

#include <span>
#include <vector>

#include "common/matrix.hpp"
#include "obliv/scalar.hpp"

namespace snail::linalg {

template <class T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
  Matrix<T> c(a.rows(), b.cols());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < b.cols(); ++j) {
      T s = a(i, 0) * b(0, j);
      for (size_t k = 1; k < a.cols(); ++k) s = s + a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

template <class T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> t(a.cols(), a.rows());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

// Aᵀ·b without forming the transpose.
template <class T>
std::vector<T> matvec_transposed(const Matrix<T>& a, std::span<const T> b) {
  if (a.rows() != b.size()) throw DimensionError("matvec: length mismatch");
  std::vector<T> out;
  for (size_t j = 0; j < a.cols(); ++j) {
    T s = a(0, j) * b[0];
    for (size_t i = 1; i < a.rows(); ++i) s = s + a(i, j) * b[i];
    out.push_back(s);
  }
  return out;
}

// Scaled 2-norm in the classic reference formulation; both branches of the
// running rescale are evaluated and one is selected.
template <class T>
T nrm2(std::span<const T> x) {
  using std::abs;
  using std::sqrt;
  const T zero(0.0), one(1.0);
  T scale = zero, ssq = one;
  for (const T& xi : x) {
    const T a = abs(xi);
    const auto nonzero = less(zero, a);
    const auto grows = less(scale, a);
    const T r1 = scale / guard_positive(a);
    const T ssq_grow = one + ssq * r1 * r1;
    const T r2 = a / guard_positive(scale);
    const T ssq_keep = ssq + r2 * r2;
    ssq = select(nonzero, select(grows, ssq_grow, ssq_keep), ssq);
    scale = select(nonzero, select(grows, a, scale), scale);
  }
  return scale * sqrt(ssq);
}

// sqrt(x² + y²) without destructive overflow.
template <class T>
T lapy2(const T& x, const T& y) {
  using std::abs;
  using std::sqrt;
  const T xa = abs(x), ya = abs(y);
  const T w = tmax(xa, ya);
  const T z = tmin(xa, ya);
  const T q = z / guard_positive(w);
  const T r = w * sqrt(T(1.0) + q * q);
  return select(less(T(0.0), z), r, w);
}

template <class T>
struct Reflector {
  T beta;
  T tau;
};

// Generates H = I − τ·v·vᵀ with v = (1, x') such that H·(alpha, x) = (beta, 0).
// x is overwritten with x'. A zero x yields the identity (τ = 0).
template <class T>
Reflector<T> larfg(const T& alpha, std::span<T> x) {
  const T zero(0.0);
  if (x.empty()) return {alpha, zero};
  const T xnorm = nrm2<T>(x);
  const auto active = less(zero, xnorm);
  const T mag = lapy2(alpha, xnorm);
  const T beta = select(less(alpha, zero), mag, -mag);
  const T tau = (beta - alpha) / select(active, beta, T(1.0));
  const T scal = T(1.0) / select(active, alpha - beta, T(1.0));
  for (T& xi : x) xi = select(active, xi * scal, xi);
  return {select(active, beta, alpha), select(active, tau, zero)};
}

template <class T>
struct BidiagonalForm {
  std::vector<T> diag;       // k entries
  std::vector<T> superdiag;  // k − 1 entries
  Matrix<T> u;               // rows × k, orthonormal columns
  Matrix<T> v;               // cols × cols
};

template <class T>
BidiagonalForm<T> householder_bidiagonalize(const Matrix<T>& input) {
  const size_t m = input.rows(), n = input.cols();
  if (m < n) throw DimensionError("bidiagonalize: needs rows >= cols");
  if (n == 0) throw DimensionError("bidiagonalize: empty matrix");
  Matrix<T> a = input;
  std::vector<T> tauq(n), taup(n);
  BidiagonalForm<T> out;

  for (size_t i = 0; i < n; ++i) {
    // Left reflector zeroes a(i+1:m, i).
    std::vector<T> col;
    for (size_t r = i + 1; r < m; ++r) col.push_back(a(r, i));
    const Reflector<T> hl = larfg<T>(a(i, i), col);
    for (size_t r = i + 1; r < m; ++r) a(r, i) = col[r - i - 1];
    out.diag.push_back(hl.beta);
    tauq[i] = hl.tau;
    if (!col.empty()) {
      for (size_t c = i + 1; c < n; ++c) {
        T w = a(i, c);
        for (size_t r = i + 1; r < m; ++r) w = w + a(r, i) * a(r, c);
        const T tw = hl.tau * w;
        a(i, c) = a(i, c) - tw;
        for (size_t r = i + 1; r < m; ++r) a(r, c) = a(r, c) - tw * a(r, i);
      }
    }
    if (i + 1 >= n) break;
    // Right reflector zeroes a(i, i+2:n).
    std::vector<T> row;
    for (size_t c = i + 2; c < n; ++c) row.push_back(a(i, c));
    const Reflector<T> hr = larfg<T>(a(i, i + 1), row);
    for (size_t c = i + 2; c < n; ++c) a(i, c) = row[c - i - 2];
    out.superdiag.push_back(hr.beta);
    taup[i] = hr.tau;
    if (!row.empty()) {
      for (size_t r = i + 1; r < m; ++r) {
        T w = a(r, i + 1);
        for (size_t c = i + 2; c < n; ++c) w = w + a(r, c) * a(i, c);
        const T tw = hr.tau * w;
        a(r, i + 1) = a(r, i + 1) - tw;
        for (size_t c = i + 2; c < n; ++c) a(r, c) = a(r, c) - tw * a(i, c);
      }
    }
  }

  // U = H_0 ... H_{n-1} applied to the first n columns of the identity.
  Matrix<T> u = Matrix<T>::zeros(m, n);
  for (size_t j = 0; j < n; ++j) u(j, j) = T(1.0);
  for (size_t ii = n; ii-- > 0;) {
    if (ii + 1 >= m) continue;  // empty reflector
    for (size_t c = ii; c < n; ++c) {
      T w = u(ii, c);
      for (size_t r = ii + 1; r < m; ++r) w = w + a(r, ii) * u(r, c);
      const T tw = tauq[ii] * w;
      u(ii, c) = u(ii, c) - tw;
      for (size_t r = ii + 1; r < m; ++r) u(r, c) = u(r, c) - tw * a(r, ii);
    }
  }
  // V = G_0 ... G_{n-3}; G_i acts on coordinates i+1..n-1.
  Matrix<T> v = Matrix<T>::identity(n);
  for (size_t ii = n >= 2 ? n - 2 : 0; ii-- > 0;) {
    for (size_t c = ii + 1; c < n; ++c) {
      T w = v(ii + 1, c);
      for (size_t r = ii + 2; r < n; ++r) w = w + a(ii, r) * v(r, c);
      const T tw = taup[ii] * w;
      v(ii + 1, c) = v(ii + 1, c) - tw;
      for (size_t r = ii + 2; r < n; ++r) v(r, c) = v(r, c) - tw * a(ii, r);
    }
  }
  out.u = std::move(u);
  out.v = std::move(v);
  return out;
}

template <class T>
struct Rotation {
  T c, s, r;
};

// Plane rotation with [c s; -s c]·[f; g] = [r; 0]. Unscaled and scaled paths
// are both evaluated; degenerate inputs at or below the tiny threshold give the
// identity rotation (g ≈ 0) or a pure swap (f ≈ 0).
template <class T>
Rotation<T> lartg(const T& f, const T& g) {
  using std::abs;
  using std::sqrt;
  const auto lim = scalar_limits<T>();
  const T zero(0.0), one(1.0);
  const T f1 = abs(f), g1 = abs(g);
  const T tiny(lim.tiny), rtmin(lim.rtmin), rtmax(lim.rtmax);
  const auto g_null = lnot(less(tiny, g1));
  const auto f_null = lnot(less(tiny, f1));
  const auto in_range =
      land(land(less(rtmin, f1), less(f1, rtmax)), land(less(rtmin, g1), less(g1, rtmax)));
  const auto f_neg = less(f, zero);

  const T d = sqrt(f * f + g * g);
  const auto d_pos = less(zero, d);
  const T d_safe = select(d_pos, d, one);
  const T c_u = f1 / d_safe;
  const T r_u = select(f_neg, -d, d);
  const T s_u = g / select(d_pos, r_u, one);

  const T u = tmin(T(lim.safmax), tmax(T(lim.safmin), tmax(f1, g1)));
  const T fs = f / u;
  const T gs = g / u;
  const T ds = sqrt(fs * fs + gs * gs);
  const auto ds_pos = less(zero, ds);
  const T c_s = abs(fs) / select(ds_pos, ds, one);
  const T r_s0 = select(f_neg, -ds, ds);
  const T s_s = gs / select(ds_pos, r_s0, one);
  const T r_s = r_s0 * u;

  T c = select(in_range, c_u, c_s);
  T s = select(in_range, s_u, s_s);
  T r = select(in_range, r_u, r_s);
  c = select(f_null, zero, c);
  s = select(f_null, select(less(g, zero), -one, one), s);
  r = select(f_null, g1, r);
  c = select(g_null, one, c);
  s = select(g_null, zero, s);
  r = select(g_null, f, r);
  return {c, s, r};
}

// Applies the rotation to columns j, j+1 of m (right-multiplication).
template <class T>
void rotate_columns(Matrix<T>& m, size_t j, const T& c, const T& s) {
  for (size_t r = 0; r < m.rows(); ++r) {
    const T t = m(r, j + 1);
    m(r, j + 1) = c * t - s * m(r, j);
    m(r, j) = s * t + c * m(r, j);
  }
}

// One implicit zero-shift QR sweep across the whole band, top to bottom,
// with the rotations accumulated into U and V. No deflation, no early exit.
template <class T>
void dk_qr_sweep(BidiagonalForm<T>& b) {
  const size_t k = b.diag.size();
  if (k < 2) return;
  auto& d = b.diag;
  auto& e = b.superdiag;
  T cs(1.0), oldcs(1.0), oldsn(0.0);
  for (size_t i = 0; i + 1 < k; ++i) {
    const Rotation<T> g1 = lartg(d[i] * cs, e[i]);
    cs = g1.c;
    const T sn = g1.s;
    if (i > 0) e[i - 1] = oldsn * g1.r;
    const Rotation<T> g2 = lartg(oldcs * g1.r, d[i + 1] * sn);
    oldcs = g2.c;
    oldsn = g2.s;
    d[i] = g2.r;
    rotate_columns(b.v, i, cs, sn);
    rotate_columns(b.u, i, oldcs, oldsn);
  }
  const T h = d[k - 1] * cs;
  d[k - 1] = h * oldcs;
  e[k - 2] = h * oldsn;
}

template <class T>
struct SvdResult {
  Matrix<T> u;           // rows × k
  std::vector<T> sigma;  // unordered, nonnegative
  Matrix<T> v;           // cols × cols
  std::vector<T> residual_superdiag;
};

template <class T>
SvdResult<T> svd_fixed(const Matrix<T>& a, int sweeps) {
  if (sweeps < 1) throw DimensionError("svd_fixed: sweeps must be >= 1");
  BidiagonalForm<T> b = householder_bidiagonalize(a);
  for (int s = 0; s < sweeps; ++s) dk_qr_sweep(b);
  SvdResult<T> out{std::move(b.u), {}, std::move(b.v), std::move(b.superdiag)};
  const T zero(0.0);
  for (size_t i = 0; i < b.diag.size(); ++i) {
    using std::abs;
    const auto neg = less(b.diag[i], zero);
    out.sigma.push_back(abs(b.diag[i]));
    for (size_t r = 0; r < out.v.rows(); ++r) out.v(r, i) = select(neg, -out.v(r, i), out.v(r, i));
  }
  return out;
}

// x = V·Σ⁺·Uᵀ·b; directions with σ ≤ τ·σ_max are treated as null.
template <class T>
std::vector<T> apply_pseudo_inverse(const SvdResult<T>& s, std::span<const T> b, double tau) {
  const size_t k = s.sigma.size();
  T smax = s.sigma[0];
  for (size_t i = 1; i < k; ++i) smax = tmax(smax, s.sigma[i]);
  const T cutoff = T(tau) * smax;
  const std::vector<T> utb = matvec_transposed(s.u, b);
  std::vector<T> w;
  for (size_t i = 0; i < k; ++i) {
    const auto keep = less(cutoff, s.sigma[i]);
    const T inv = T(1.0) / select(keep, s.sigma[i], T(1.0));
    w.push_back(select(keep, utb[i] * inv, T(0.0)));
  }
  std::vector<T> x;
  for (size_t r = 0; r < s.v.rows(); ++r) {
    T acc = s.v(r, 0) * w[0];
    for (size_t i = 1; i < k; ++i) acc = acc + s.v(r, i) * w[i];
    x.push_back(acc);
  }
  return x;
}

constexpr double kPinvTau = 1e-6;

template <class T>
std::vector<T> solve_spd_via_svd(const Matrix<T>& a, std::span<const T> b, int sweeps, double tau = kPinvTau) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw DimensionError("solve: shape mismatch");
  return apply_pseudo_inverse(svd_fixed(a, sweeps), b, tau);
}

template <class T>
std::vector<T> pinv_apply(const Matrix<T>& j, std::span<const T> r, int sweeps, double tau = kPinvTau) {
  if (j.rows() != r.size()) throw DimensionError("pinv_apply: shape mismatch");
  return apply_pseudo_inverse(svd_fixed(j, sweeps), r, tau);
}

}  // namespace snail::linalg

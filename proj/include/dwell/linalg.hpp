#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dwell/matrix.hpp"

namespace dwell {

/// Matrix exponential e^{A t} by scaling-and-squaring with the degree-13
/// Pade approximant. Squaring threshold ||At||_1 <= 5.37, no balancing.
/// Negative t is allowed (the sign is absorbed into the scaled matrix).
inline Matrix expm(const Matrix& a, double t = 1.0) {
  if (!a.square()) throw std::invalid_argument("expm: matrix must be square");
  const int n = a.rows();
  Matrix at = a * t;
  if (!at.all_finite()) throw std::invalid_argument("expm: non-finite input");

  static const double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
  const double theta13 = 5.37;

  int squarings = 0;
  const double nrm = at.norm_one();
  if (nrm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    at *= std::ldexp(1.0, -squarings);
  }

  const Matrix id = Matrix::identity(n);
  const Matrix a2 = at * at;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;

  Matrix u = at * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;

  // (V - U) F = (V + U), solved column by column.
  Matrix lhs = v - u;
  Matrix rhs = v + u;
  Matrix f(n, n);
  for (int j = 0; j < n; ++j) {
    std::vector<double> col(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = rhs(i, j);
    std::vector<double> x = lu_solve(lhs, std::move(col));
    for (int i = 0; i < n; ++i) f(i, j) = x[static_cast<std::size_t>(i)];
  }
  for (int s = 0; s < squarings; ++s) f = f * f;
  return f;
}

namespace detail {

/// Cyclic Jacobi sweep driver. Returns eigenvalues (descending) and, when
/// requested, the accumulated orthogonal matrix with eigenvectors in columns.
inline std::pair<std::vector<double>, Matrix> jacobi_eig(Matrix s, bool want_vectors) {
  const int n = s.rows();
  Matrix v = want_vectors ? Matrix::identity(n) : Matrix();
  const double stop = 1e-12 * std::max(s.norm_fro(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += 2.0 * s(p, q) * s(p, q);
    if (std::sqrt(off) <= stop) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (s(p, q) == 0.0) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
        const double sign = theta >= 0.0 ? 1.0 : -1.0;
        const double tt = sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(tt * tt + 1.0);
        const double sn = tt * c;
        for (int k = 0; k < n; ++k) {
          const double skp = s(k, p), skq = s(k, q);
          s(k, p) = c * skp - sn * skq;
          s(k, q) = sn * skp + c * skq;
        }
        for (int k = 0; k < n; ++k) {
          const double spk = s(p, k), sqk = s(q, k);
          s(p, k) = c * spk - sn * sqk;
          s(q, k) = sn * spk + c * sqk;
        }
        if (want_vectors) {
          for (int k = 0; k < n; ++k) {
            const double vkp = v(k, p), vkq = v(k, q);
            v(k, p) = c * vkp - sn * vkq;
            v(k, q) = sn * vkp + c * vkq;
          }
        }
      }
    }
  }
  std::vector<double> lam(static_cast<std::size_t>(n));
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    lam[static_cast<std::size_t>(i)] = s(i, i);
    order[static_cast<std::size_t>(i)] = i;
  }
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return lam[static_cast<std::size_t>(x)] > lam[static_cast<std::size_t>(y)]; });
  std::vector<double> sorted(static_cast<std::size_t>(n));
  Matrix vs = want_vectors ? Matrix(n, n) : Matrix();
  for (int i = 0; i < n; ++i) {
    sorted[static_cast<std::size_t>(i)] = lam[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    if (want_vectors)
      for (int k = 0; k < n; ++k) vs(k, i) = v(k, order[static_cast<std::size_t>(i)]);
  }
  return {std::move(sorted), std::move(vs)};
}

inline void require_symmetric(const Matrix& s) {
  if (!s.square()) throw std::invalid_argument("symmetric_eigs: matrix must be square");
  const double asym = (s - s.transposed()).max_abs();
  if (asym > 1e-12 * std::max(1.0, s.max_abs()))
    throw std::invalid_argument("symmetric_eigs: matrix is not symmetric");
}

}  // namespace detail

/// Full spectrum of a symmetric matrix via cyclic Jacobi, sorted descending.
inline std::vector<double> symmetric_eigs(const Matrix& s) {
  detail::require_symmetric(s);
  return detail::jacobi_eig(s.symmetrized(), false).first;
}

/// Spectrum plus orthonormal eigenvectors (columns match the sorted values).
inline std::pair<std::vector<double>, Matrix> symmetric_eig_decomp(const Matrix& s) {
  detail::require_symmetric(s);
  return detail::jacobi_eig(s.symmetrized(), true);
}

/// Smallest factor g such that P <= g Q in the Loewner order, i.e.
/// lambda_max(L^{-1} P L^{-T}) with Q = L L^T.
inline double gen_eig_max(const SpdMatrix& p, const SpdMatrix& q) {
  if (p.dim() != q.dim()) throw std::invalid_argument("gen_eig_max: dimension mismatch");
  const int n = p.dim();
  const Matrix& l = q.cholesky();
  // B = L^{-1} P L^{-T}: solve L Y = P, then B^T = L^{-1} Y^T.
  Matrix y(n, n);
  for (int j = 0; j < n; ++j) {
    std::vector<double> col(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = p.matrix()(i, j);
    std::vector<double> sol = forward_subst(l, col);
    for (int i = 0; i < n; ++i) y(i, j) = sol[static_cast<std::size_t>(i)];
  }
  Matrix b(n, n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = y(i, j);
    std::vector<double> sol = forward_subst(l, row);
    for (int j = 0; j < n; ++j) b(i, j) = sol[static_cast<std::size_t>(j)];
  }
  return detail::jacobi_eig(b.symmetrized(), false).first.front();
}

/// Eigenvalues of a general real square matrix (n <= 20): Householder
/// reduction to Hessenberg form followed by Francis double-shift QR with
/// deflation. Accurate to about 1e-8 for well-conditioned spectra.
inline std::vector<std::complex<double>> eigvals_general(const Matrix& a_in) {
  if (!a_in.square()) throw std::invalid_argument("eigvals_general: matrix must be square");
  const int n = a_in.rows();
  if (n > 20) throw std::invalid_argument("eigvals_general: dimension cap is 20");
  Matrix h = a_in;

  // Householder reduction to upper Hessenberg.
  for (int k = 0; k < n - 2; ++k) {
    double scale = 0.0;
    for (int i = k + 1; i < n; ++i) scale += std::abs(h(i, k));
    if (scale == 0.0) continue;
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    double sigma = 0.0;
    for (int i = k + 1; i < n; ++i) {
      w[static_cast<std::size_t>(i)] = h(i, k) / scale;
      sigma += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
    }
    double alpha = std::sqrt(sigma);
    if (w[static_cast<std::size_t>(k + 1)] < 0.0) alpha = -alpha;
    w[static_cast<std::size_t>(k + 1)] += alpha;
    const double beta = alpha * w[static_cast<std::size_t>(k + 1)];
    if (beta == 0.0) continue;
    // H <- (I - ww^T/beta) H (I - ww^T/beta)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int i = k + 1; i < n; ++i) s += w[static_cast<std::size_t>(i)] * h(i, j);
      s /= beta;
      for (int i = k + 1; i < n; ++i) h(i, j) -= s * w[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = k + 1; j < n; ++j) s += h(i, j) * w[static_cast<std::size_t>(j)];
      s /= beta;
      for (int j = k + 1; j < n; ++j) h(i, j) -= s * w[static_cast<std::size_t>(j)];
    }
  }

  std::vector<std::complex<double>> eig;
  eig.reserve(static_cast<std::size_t>(n));
  int hi = n - 1;
  int iter_this_block = 0;
  const int iter_cap = 80;
  const double eps = 1e-15;

  auto push_2x2 = [&](int p) {
    // Eigenvalues of the trailing 2x2 block [p-1..p].
    const double a = h(p - 1, p - 1), b = h(p - 1, p), c = h(p, p - 1), d = h(p, p);
    const double tr = a + d;
    const double disc = (a - d) * (a - d) / 4.0 + b * c;
    if (disc >= 0.0) {
      const double r = std::sqrt(disc);
      eig.emplace_back(tr / 2.0 + r, 0.0);
      eig.emplace_back(tr / 2.0 - r, 0.0);
    } else {
      const double im = std::sqrt(-disc);
      eig.emplace_back(tr / 2.0, im);
      eig.emplace_back(tr / 2.0, -im);
    }
  };

  while (hi >= 0) {
    if (hi == 0) {
      eig.emplace_back(h(0, 0), 0.0);
      break;
    }
    // Deflation scan.
    int lo = hi;
    while (lo > 0) {
      const double s = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
      if (std::abs(h(lo, lo - 1)) <= eps * std::max(s, 1e-300)) {
        h(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      eig.emplace_back(h(hi, hi), 0.0);
      --hi;
      iter_this_block = 0;
      continue;
    }
    if (lo == hi - 1) {
      push_2x2(hi);
      hi -= 2;
      iter_this_block = 0;
      continue;
    }
    if (++iter_this_block > iter_cap)
      throw std::runtime_error("eigvals_general: QR iteration did not converge");

    // Francis double-shift on rows lo..hi.
    double s_tr = h(hi - 1, hi - 1) + h(hi, hi);
    double s_det = h(hi - 1, hi - 1) * h(hi, hi) - h(hi - 1, hi) * h(hi, hi - 1);
    if (iter_this_block % 11 == 10) {
      // Exceptional shift to break stagnation.
      const double w = std::abs(h(hi, hi - 1)) + std::abs(h(hi - 1, hi - 2));
      s_tr = 2.0 * (h(hi, hi) + 1.5 * w);
      s_det = (h(hi, hi) + 1.5 * w) * (h(hi, hi) + 1.5 * w);
    }
    double x = h(lo, lo) * h(lo, lo) + h(lo, lo + 1) * h(lo + 1, lo) - s_tr * h(lo, lo) + s_det;
    double y = h(lo + 1, lo) * (h(lo, lo) + h(lo + 1, lo + 1) - s_tr);
    double z = h(lo + 2, lo + 1) * h(lo + 1, lo);
    for (int k = lo; k <= hi - 1; ++k) {
      // Householder on (x, y, z).
      double col[3] = {x, y, z};
      const int len = (k < hi - 1) ? 3 : 2;
      double nrm = 0.0;
      for (int i = 0; i < len; ++i) nrm += col[i] * col[i];
      nrm = std::sqrt(nrm);
      if (nrm == 0.0) continue;
      double alpha = (col[0] >= 0.0) ? -nrm : nrm;
      double v[3] = {col[0] - alpha, col[1], col[2]};
      double vn = 0.0;
      for (int i = 0; i < len; ++i) vn += v[i] * v[i];
      if (vn == 0.0) continue;
      const int r0 = k;
      // Apply (I - 2vv^T/vn) from the left to rows k..k+len-1.
      for (int j = std::max(lo, k - 1); j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < len; ++i) s += v[i] * h(r0 + i, j);
        s *= 2.0 / vn;
        for (int i = 0; i < len; ++i) h(r0 + i, j) -= s * v[i];
      }
      // Apply from the right to columns k..k+len-1.
      const int last_row = std::min(hi, k + 3);
      for (int i = 0; i <= last_row; ++i) {
        double s = 0.0;
        for (int j = 0; j < len; ++j) s += h(i, r0 + j) * v[j];
        s *= 2.0 / vn;
        for (int j = 0; j < len; ++j) h(i, r0 + j) -= s * v[j];
      }
      if (k < hi - 1) {
        x = h(k + 1, k);
        y = h(k + 2, k);
        z = (k + 3 <= hi) ? h(k + 3, k) : 0.0;
      }
    }
  }
  return eig;
}

/// Largest real part over the spectrum.
inline double spectral_abscissa(const Matrix& a) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& z : eigvals_general(a)) best = std::max(best, z.real());
  return best;
}

/// Solves the continuous Lyapunov equation A^T P + P A = -Q for SPD Q and
/// Hurwitz A via the Kronecker-product linear system (O(n^6), n <= 20).
/// The result is symmetrized, verified SPD, and its residual is checked
/// against 1e-9 * ||Q||_inf.
inline SpdMatrix lyap_solve(const Matrix& a, const SpdMatrix& q) {
  if (!a.square() || a.rows() != q.dim()) throw std::invalid_argument("lyap_solve: shape mismatch");
  const int n = a.rows();
  if (n > 20) throw std::invalid_argument("lyap_solve: dimension cap is 20");
  for (const auto& z : eigvals_general(a)) {
    if (!(z.real() < -1e-12))
      throw std::invalid_argument("lyap_solve: matrix is not Hurwitz (eigenvalue " + std::to_string(z.real()) +
                                  (z.imag() >= 0 ? "+" : "-") + std::to_string(std::abs(z.imag())) + "i)");
  }

  const int nn = n * n;
  Matrix k(nn, nn);
  auto idx = [n](int r, int c) { return r * n + c; };
  // Row (i,j): sum_k A(k,i) P(k,j) + sum_l A(l,j) P(i,l) = -Q(i,j)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int row = idx(i, j);
      for (int kk = 0; kk < n; ++kk) k(row, idx(kk, j)) += a(kk, i);
      for (int l = 0; l < n; ++l) k(row, idx(i, l)) += a(l, j);
    }
  }
  auto solve_for = [&](const Matrix& rhs_mat) {
    std::vector<double> rhs(static_cast<std::size_t>(nn));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) rhs[static_cast<std::size_t>(idx(i, j))] = -rhs_mat(i, j);
    std::vector<double> sol = lu_solve(k, std::move(rhs));
    Matrix p(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) p(i, j) = sol[static_cast<std::size_t>(idx(i, j))];
    return p;
  };

  Matrix p = solve_for(q.matrix());
  // One step of iterative refinement buys several digits on stiff shifts.
  Matrix residual = a.transposed() * p + p * a + q.matrix();
  p = (p + solve_for(residual)).symmetrized();

  residual = a.transposed() * p + p * a + q.matrix();
  if (residual.norm_inf() > 1e-9 * q.matrix().norm_inf())
    throw std::runtime_error("lyap_solve: residual check failed");
  return SpdMatrix(p);
}

}  // namespace dwell

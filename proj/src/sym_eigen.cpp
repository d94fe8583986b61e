#include "proxfact/sym_eigen.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "proxfact/errors.hpp"

namespace proxfact {

namespace {

double hypot2(double a, double b) { return std::hypot(a, b); }

// Householder reduction of a symmetric matrix held in z to tridiagonal form
// (diagonal d, subdiagonal e), transformations accumulated in z.
void tridiagonalize(Eigen::MatrixXd& z, Eigen::VectorXd& d, Eigen::VectorXd& e) {
  const int n = static_cast<int>(z.rows());
  for (int i = n - 1; i >= 1; --i) {
    const int l = i - 1;
    double h = 0.0;
    double scale = 0.0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) scale += std::abs(z(i, k));
      if (scale == 0.0) {
        e(i) = z(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e(i) = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          z(j, i) = z(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
          for (int k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
          e(j) = g / h;
          f += e(j) * z(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = z(i, j);
          e(j) = g = e(j) - hh * f;
          for (int k = 0; k <= j; ++k) z(j, k) -= f * e(k) + g * z(i, k);
        }
      }
    } else {
      e(i) = z(i, l);
    }
    d(i) = h;
  }
  d(0) = 0.0;
  e(0) = 0.0;
  for (int i = 0; i < n; ++i) {
    const int l = i - 1;
    if (d(i) != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0.0;
        for (int k = 0; k <= l; ++k) g += z(i, k) * z(k, j);
        for (int k = 0; k <= l; ++k) z(k, j) -= g * z(k, i);
      }
    }
    d(i) = z(i, i);
    z(i, i) = 1.0;
    for (int j = 0; j <= l; ++j) z(j, i) = z(i, j) = 0.0;
  }
}

// Implicit-shift QL on the tridiagonal (d, e) with accumulation into z.
void ql_implicit(Eigen::MatrixXd& z, Eigen::VectorXd& d, Eigen::VectorXd& e) {
  const int n = static_cast<int>(z.rows());
  const double eps = std::numeric_limits<double>::epsilon();
  constexpr int kMaxIter = 50;
  for (int i = 1; i < n; ++i) e(i - 1) = e(i);
  e(n - 1) = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d(m)) + std::abs(d(m + 1));
        if (std::abs(e(m)) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == kMaxIter)
          throw NumericalError(
              "symmetric eigensolver: QL failed to converge after " + std::to_string(kMaxIter) +
              " iterations; residual off-diagonal " + std::to_string(e(l)) + " at index " +
              std::to_string(l) + " (n=" + std::to_string(n) + ")");
        double g = (d(l + 1) - d(l)) / (2.0 * e(l));
        double r = hypot2(g, 1.0);
        g = d(m) - d(l) + e(l) / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e(i);
          const double b = c * e(i);
          r = hypot2(f, g);
          e(i + 1) = r;
          if (r == 0.0) {
            d(i + 1) -= p;
            e(m) = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d(i + 1) - p;
          r = (d(i) - g) * s + 2.0 * c * b;
          p = s * r;
          d(i + 1) = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        d(l) -= p;
        e(l) = g;
        e(m) = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

SymEigen symmetric_eigen_full(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw InputError("symmetric_eigen: matrix is not square");
  const int n = static_cast<int>(a.rows());
  if (n == 0) throw InputError("symmetric_eigen: empty matrix");

  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(scale, 1e-300))
    throw InputError("symmetric_eigen: input is not symmetric (max asymmetry " +
                     std::to_string(asym) + " vs scale " + std::to_string(scale) + ")");

  SymEigen out;
  out.vectors = 0.5 * (a + a.transpose());
  out.values = Eigen::VectorXd::Zero(n);
  if (n == 1) {
    out.values(0) = out.vectors(0, 0);
    out.vectors(0, 0) = 1.0;
    return out;
  }
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  tridiagonalize(out.vectors, out.values, e);
  ql_implicit(out.vectors, out.values, e);

  // Sort descending; ties keep the iteration order.
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int i, int j) { return out.values(i) > out.values(j); });
  Eigen::VectorXd sorted_values(n);
  Eigen::MatrixXd sorted_vectors(n, n);
  for (int k = 0; k < n; ++k) {
    sorted_values(k) = out.values(idx[static_cast<std::size_t>(k)]);
    sorted_vectors.col(k) = out.vectors.col(idx[static_cast<std::size_t>(k)]);
  }
  out.values = std::move(sorted_values);
  out.vectors = std::move(sorted_vectors);
  return out;
}

SymEigen symmetric_eigen(const Eigen::MatrixXd& a, int top_k) {
  const int n = static_cast<int>(a.rows());
  if (top_k < 1 || top_k > n)
    throw InputError("symmetric_eigen: top_k=" + std::to_string(top_k) +
                     " out of range for n=" + std::to_string(n));
  SymEigen full = symmetric_eigen_full(a);
  if (top_k == n) return full;
  SymEigen out;
  out.values = full.values.head(top_k);
  out.vectors = full.vectors.leftCols(top_k);
  return out;
}

}  // namespace proxfact

#include "vortexlab/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace vl {

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double s, const Vec& x, Vec& y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

KrylovResult gmres(const LinearOp& A, const LinearOp& precond, const Vec& b, Vec& x, int restart, double rtol,
                   int max_iter) {
  const size_t n = b.size();
  KrylovResult res;
  double bnorm = norm2(b);
  if (x.size() != n) x.assign(n, 0.0);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  Vec r(n), w(n), z(n);
  std::vector<Vec> V(restart + 1, Vec(n));
  std::vector<double> H((restart + 1) * restart), cs(restart), sn(restart), g(restart + 1);
  auto h = [&](int i, int j) -> double& { return H[i * restart + j]; };

  double last_beta = 0.0;
  while (res.iterations < max_iter) {
    A(x, r);
    for (size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double beta = norm2(r);
    res.rel_residual = beta / bnorm;
    if (res.rel_residual <= rtol) {
      res.converged = true;
      return res;
    }
    // a full restart cycle that fails to halve the true residual has hit the roundoff floor
    if (last_beta > 0.0 && beta > 0.5 * last_beta) return res;
    last_beta = beta;
    for (size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < restart && res.iterations < max_iter; ++k) {
      ++res.iterations;
      precond(V[k], z);
      A(z, w);
      for (int i = 0; i <= k; ++i) {
        h(i, k) = dot(w, V[i]);
        axpy(-h(i, k), V[i], w);
      }
      // one reorthogonalisation pass keeps the basis clean at tight tolerances
      for (int i = 0; i <= k; ++i) {
        double c = dot(w, V[i]);
        h(i, k) += c;
        axpy(-c, V[i], w);
      }
      h(k + 1, k) = norm2(w);
      if (h(k + 1, k) > 0.0)
        for (size_t i = 0; i < n; ++i) V[k + 1][i] = w[i] / h(k + 1, k);
      for (int i = 0; i < k; ++i) {
        double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
        h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
        h(i, k) = t;
      }
      double d = std::hypot(h(k, k), h(k + 1, k));
      cs[k] = d == 0.0 ? 1.0 : h(k, k) / d;
      sn[k] = d == 0.0 ? 0.0 : h(k + 1, k) / d;
      h(k, k) = d;
      h(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      res.rel_residual = std::abs(g[k + 1]) / bnorm;
      if (res.rel_residual <= rtol || d == 0.0) {
        ++k;
        break;
      }
    }
    std::vector<double> y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= h(i, j) * y[j];
      y[i] = s / h(i, i);
    }
    Vec dx(n, 0.0);
    for (int i = 0; i < k; ++i) axpy(y[i], V[i], dx);
    precond(dx, z);
    axpy(1.0, z, x);
    if (res.rel_residual <= rtol) {
      A(x, r);
      for (size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
      res.rel_residual = norm2(r) / bnorm;
      // the recurrence residual can drift from the true one by roundoff; accept a small gap
      if (res.rel_residual <= 10.0 * rtol) {
        res.converged = true;
        return res;
      }
    }
  }
  return res;
}

Vec dense_solve(const LinearOp& A, const Vec& b) {
  const int n = static_cast<int>(b.size());
  Eigen::MatrixXd M(n, n);
  Vec e(n, 0.0), col(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    A(e, col);
    e[j] = 0.0;
    for (int i = 0; i < n; ++i) M(i, j) = col[i];
  }
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), n);
  Eigen::VectorXd sol = M.partialPivLu().solve(rhs);
  return Vec(sol.data(), sol.data() + n);
}

}  // namespace vl

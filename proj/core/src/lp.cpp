#include "badmarket/lp.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <vector>

namespace badmarket::lp {

namespace {

// Tableau rows 0..m-1 are constraints, row m is the objective (reduced costs
// for a maximization written as z - c.x = 0). Column `cols` is the RHS.
struct Tableau {
  Matrix t;
  std::vector<int> basis;
  int rows = 0;
  int cols = 0;

  double& rhs(int r) { return t(r, cols); }

  void pivot(int pr, int pc) {
    t.row(pr) /= t(pr, pc);
    for (int r = 0; r <= rows; ++r) {
      if (r == pr) continue;
      const double f = t(r, pc);
      if (f != 0.0) t.row(r) -= f * t.row(pr);
    }
    basis[static_cast<std::size_t>(pr)] = pc;
  }

  // Runs simplex iterations on objective row `rows`; columns >= `allowed` are
  // never entered. Returns false when unbounded.
  bool run(int allowed, double tol) {
    for (int iter = 0; iter < 50000; ++iter) {
      int enter = -1;
      for (int c = 0; c < allowed; ++c) {
        if (t(rows, c) < -tol) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = kInf;
      for (int r = 0; r < rows; ++r) {
        const double a = t(r, enter);
        if (a > tol) {
          const double ratio = rhs(r) / a;
          if (ratio < best - tol ||
              (std::abs(ratio - best) <= tol && leave >= 0 &&
               basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    return true;
  }
};

}  // namespace

Result maximize(const Vector& c, const Matrix& a_ub, const Vector& b_ub, const Matrix& a_eq,
                const Vector& b_eq, double tol) {
  const int n = static_cast<int>(c.size());
  const int m_ub = static_cast<int>(a_ub.rows());
  const int m_eq = static_cast<int>(a_eq.rows());
  const int m = m_ub + m_eq;
  const int slack0 = n;
  const int art0 = n + m_ub;
  const int cols = n + m_ub + m;

  Tableau tab;
  tab.rows = m;
  tab.cols = cols;
  tab.t = Matrix::Zero(m + 1, cols + 1);
  tab.basis.assign(static_cast<std::size_t>(m), -1);

  for (int r = 0; r < m; ++r) {
    double b = 0.0;
    if (r < m_ub) {
      tab.t.block(r, 0, 1, n) = a_ub.row(r);
      tab.t(r, slack0 + r) = 1.0;
      b = b_ub[r];
    } else {
      tab.t.block(r, 0, 1, n) = a_eq.row(r - m_ub);
      b = b_eq[r - m_ub];
    }
    tab.t(r, cols) = b;
    if (b < 0.0) tab.t.row(r) *= -1.0;
    tab.t(r, art0 + r) = 1.0;
    tab.basis[static_cast<std::size_t>(r)] = art0 + r;
  }

  // Phase I: maximize -sum(artificials).
  for (int r = 0; r < m; ++r) tab.t(m, art0 + r) = 1.0;
  for (int r = 0; r < m; ++r) tab.t.row(m) -= tab.t.row(r);
  tab.run(cols, tol);

  Result res;
  // The objective row's RHS holds -sum(artificials) at the phase I optimum.
  const double scale = std::max(1.0, b_ub.cwiseAbs().sum() + b_eq.cwiseAbs().sum());
  if (tab.rhs(m) < -tol * scale) {
    res.status = Status::Infeasible;
    return res;
  }
  // Drive remaining artificials out of the basis where possible.
  for (int r = 0; r < m; ++r) {
    if (tab.basis[static_cast<std::size_t>(r)] < art0) continue;
    for (int cidx = 0; cidx < art0; ++cidx) {
      if (std::abs(tab.t(r, cidx)) > tol) {
        tab.pivot(r, cidx);
        break;
      }
    }
  }

  // Phase II objective row.
  tab.t.row(m).setZero();
  for (int j = 0; j < n; ++j) tab.t(m, j) = -c[j];
  for (int r = 0; r < m; ++r) {
    const int b = tab.basis[static_cast<std::size_t>(r)];
    if (b < n && c[b] != 0.0) tab.t.row(m) += c[b] * tab.t.row(r);
  }
  if (!tab.run(art0, tol)) {
    res.status = Status::Unbounded;
    return res;
  }

  res.status = Status::Optimal;
  res.x = Vector::Zero(n);
  for (int r = 0; r < m; ++r) {
    const int b = tab.basis[static_cast<std::size_t>(r)];
    if (b < n) res.x[b] = std::max(0.0, tab.rhs(r));
  }
  res.objective = c.dot(res.x);
  return res;
}

bool feasible(const Matrix& a_ub, const Vector& b_ub, const Matrix& a_eq, const Vector& b_eq,
              Vector* witness, double tol) {
  const auto n = std::max(a_ub.cols(), a_eq.cols());
  const Result r = maximize(Vector::Zero(n), a_ub, b_ub, a_eq, b_eq, tol);
  if (r.status == Status::Infeasible) return false;
  if (witness) *witness = r.x;
  return true;
}

Vector nnls(const Matrix& a, const Vector& b, int max_iter) {
  const auto n = a.cols();
  Vector x = Vector::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-12 * std::max<double>(1.0, a.cwiseAbs().maxCoeff()) * static_cast<double>(n + 1);

  auto solve_passive = [&](Vector& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    z = Vector::Zero(n);
    if (idx.empty()) return;
    Matrix sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    const Vector zs = sub.colPivHouseholderQr().solve(b);
    for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zs[static_cast<Eigen::Index>(k)];
  };

  for (int outer = 0; outer < max_iter; ++outer) {
    const Vector w = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > wmax) {
        wmax = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    for (int inner = 0; inner < max_iter; ++inner) {
      Vector z;
      solve_passive(z);
      bool ok = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) ok = false;
      if (ok) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) {
          const double denom = x[j] - z[j];
          if (denom > 0.0) alpha = std::min(alpha, x[j] / denom);
        }
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x[j] <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x[j] = 0.0;
        }
      }
    }
  }
  return x;
}

}  // namespace badmarket::lp

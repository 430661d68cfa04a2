#include "lemsim/hems/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <fmt/format.h>

#include "lemsim/core/error.hpp"

namespace lemsim::lp {

int Problem::add_column(double cost, double upper, std::initializer_list<std::pair<int, double>> entries) {
  cost_.push_back(cost);
  upper_.push_back(upper);
  for (const auto& [r, v] : entries) {
    row_idx_.push_back(r);
    val_.push_back(v);
  }
  col_start_.push_back(static_cast<int>(row_idx_.size()));
  return cols() - 1;
}

namespace {

// Lower band of a symmetric positive definite matrix, row-major with bw
// leading zero slots per row so every row has the same shape: entry (i, j),
// j <= i, lives at i * (bw + 1) + bw - (i - j).
class BandedCholesky {
 public:
  BandedCholesky(int n, int bw) : n_(n), w_(bw + 1), a_(static_cast<std::size_t>(n) * (bw + 1), 0.0) {}

  [[nodiscard]] int pos(int i, int j) const { return i * w_ + (w_ - 1) - (i - j); }
  double* data() { return a_.data(); }
  void clear() { std::fill(a_.begin(), a_.end(), 0.0); }

  void factor() {
    const int bw = w_ - 1;
    double* a = a_.data();
    for (int i = 0; i < n_; ++i) {
      double* ri = a + static_cast<std::ptrdiff_t>(i) * w_;
      const int j0 = std::max(0, i - bw);
      for (int j = j0; j < i; ++j) {
        const double* rj = a + static_cast<std::ptrdiff_t>(j) * w_;
        // Entries (i, k) and (j, k) for max(j0, j - bw) <= k < j.
        const int k0 = std::max(j0, j - bw);
        const double* pi = ri + (bw - (i - k0));
        const double* pj = rj + (bw - (j - k0));
        double s = pi[j - k0];
        for (int k = 0; k < j - k0; ++k) s -= pi[k] * pj[k];
        ri[bw - (i - j)] = s * rj[bw];
      }
      double s = ri[bw];
      for (int k = bw - (i - j0); k < bw; ++k) s -= ri[k] * ri[k];
      // A vanishing pivot means the row is (numerically) redundant; a zero
      // inverse pivot zeroes the corresponding component of the solution.
      ri[bw] = s > 1e-30 ? 1.0 / std::sqrt(s) : 0.0;
    }
  }

  // Diagonal slots hold inverse pivots after factor().
  void solve(double* b) const {
    const int bw = w_ - 1;
    const double* a = a_.data();
    for (int i = 0; i < n_; ++i) {
      const double* ri = a + static_cast<std::ptrdiff_t>(i) * w_;
      const int k0 = std::max(0, i - bw);
      double s = b[i];
      for (int k = k0; k < i; ++k) s -= ri[bw - (i - k)] * b[k];
      b[i] = s * ri[bw];
    }
    for (int i = n_ - 1; i >= 0; --i) {
      const double* ri = a + static_cast<std::ptrdiff_t>(i) * w_;
      b[i] *= ri[bw];
      const double bi = b[i];
      const int k0 = std::max(0, i - bw);
      for (int k = k0; k < i; ++k) b[k] -= ri[bw - (i - k)] * bi;
    }
  }

 private:
  int n_, w_;
  std::vector<double> a_;
};

// Small proximal terms keep the normal equations well conditioned once
// variables reach their bounds.
constexpr double kPrimalReg = 1e-10;
constexpr double kDualReg = 1e-10;

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Longest steps in [0, 1] keeping x + a dx >= 0, w - a dx >= 0 (primal) and
// z + a dz >= 0, v + a dv >= 0 (dual).
std::pair<double, double> max_steps(std::size_t n, const double* x, const double* w, const double* dx, const double* z,
                                    const double* v, const double* dz, const double* dv) {
  double ap = 1.0, ad = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    // Divide only when the component actually limits the step.
    if (x[j] + ap * dx[j] < 0.0) ap = -x[j] / dx[j];
    if (w[j] - ap * dx[j] < 0.0) ap = w[j] / dx[j];
    if (z[j] + ad * dz[j] < 0.0) ad = -z[j] / dz[j];
    if (v[j] + ad * dv[j] < 0.0) ad = -v[j] / dv[j];
  }
  return {ap, ad};
}

// One Mehrotra run from the default starting point. Returns the residual
// score of the best iterate (below one means converged).
double attempt(const Problem& p, const Options& opts, double step_factor, Solution& best) {
  const int m = p.rows();
  const int n = p.cols();
  const auto N = static_cast<std::size_t>(n);
  const auto M = static_cast<std::size_t>(m);
  const double* c = p.cost_.data();
  const double* u = p.upper_.data();
  const double* b = p.rhs_.data();
  const int* cs = p.col_start_.data();
  const int* ri = p.row_idx_.data();
  const double* av = p.val_.data();

  int bw = 0;
  for (int j = 0; j < n; ++j) {
    int lo = m, hi = -1;
    for (int k = cs[j]; k < cs[j + 1]; ++k) {
      lo = std::min(lo, ri[k]);
      hi = std::max(hi, ri[k]);
    }
    if (hi >= 0) bw = std::max(bw, hi - lo);
  }
  BandedCholesky chol(m, bw);

  // Contributions of column j to A diag(theta) A': band slot and coefficient.
  std::vector<int> pair_start(N + 1, 0), pair_pos;
  std::vector<double> pair_coef;
  for (int j = 0; j < n; ++j) {
    for (int k = cs[j]; k < cs[j + 1]; ++k) {
      for (int l = cs[j]; l < cs[j + 1]; ++l) {
        if (ri[l] > ri[k]) continue;
        pair_pos.push_back(chol.pos(ri[k], ri[l]));
        pair_coef.push_back(av[k] * av[l]);
      }
    }
    pair_start[static_cast<std::size_t>(j) + 1] = static_cast<int>(pair_pos.size());
  }
  std::vector<int> diag_pos(M);
  for (int i = 0; i < m; ++i) diag_pos[static_cast<std::size_t>(i)] = chol.pos(i, i);

  std::vector<double> x(N), w(N), z(N), v(N), y(M, 0.0);
  for (std::size_t j = 0; j < N; ++j) {
    if (!(u[j] > 0.0)) throw Error(ErrorCode::SolverFailure, "every variable needs a positive upper bound");
    x[j] = 0.5 * u[j];
    w[j] = u[j] - x[j];
    z[j] = std::max(c[j], 0.0) + 1.0;
    v[j] = std::max(-c[j], 0.0) + 1.0;
  }

  const double b_norm = inf_norm(p.rhs_);
  const double c_norm = inf_norm(p.cost_);
  std::vector<double> rp(M), rd(N), theta(N), rhat(N), rhs(M), dy(M);
  std::vector<double> dx(N), dz(N), dv(N), dx_a(N), dz_a(N), dv_a(N);
  std::vector<double> rxz(N), rwv(N), inv_x(N), inv_w(N);

  // Newton direction for complementarity targets rxz, rwv; dw = -dx.
  auto direction = [&](double* ddx, double* ddz, double* ddv) {
    std::copy(rp.begin(), rp.end(), rhs.begin());
    for (std::size_t j = 0; j < N; ++j) {
      rhat[j] = rd[j] - rxz[j] * inv_x[j] + rwv[j] * inv_w[j];
      const double t = theta[j] * rhat[j];
      for (int k = cs[j]; k < cs[j + 1]; ++k) rhs[static_cast<std::size_t>(ri[k])] += av[k] * t;
    }
    std::copy(rhs.begin(), rhs.end(), dy.begin());
    chol.solve(dy.data());
    for (std::size_t j = 0; j < N; ++j) {
      double aty = 0.0;
      for (int k = cs[j]; k < cs[j + 1]; ++k) aty += av[k] * dy[static_cast<std::size_t>(ri[k])];
      const double d = theta[j] * (aty - rhat[j]);
      ddx[j] = d;
      ddz[j] = (rxz[j] - z[j] * d) * inv_x[j];
      ddv[j] = (rwv[j] + v[j] * d) * inv_w[j];
    }
  };

  double best_score = std::numeric_limits<double>::infinity();
  double* L = chol.data();
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    std::copy(b, b + m, rp.begin());
    double pobj = 0.0, dobj = 0.0, comp = 0.0, dres_abs = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      double aty = 0.0;
      const double xj = x[j];
      for (int k = cs[j]; k < cs[j + 1]; ++k) {
        const auto r = static_cast<std::size_t>(ri[k]);
        rp[r] -= av[k] * xj;
        aty += av[k] * y[r];
      }
      rd[j] = c[j] - aty - z[j] + v[j];
      dres_abs = std::max(dres_abs, std::abs(rd[j]));
      pobj += c[j] * xj;
      dobj -= u[j] * v[j];
      comp += xj * z[j] + w[j] * v[j];
    }
    for (std::size_t i = 0; i < M; ++i) dobj += b[i] * y[i];
    const double mu = comp / (2.0 * static_cast<double>(n));

    const double pres = inf_norm(rp) / (1.0 + b_norm);
    const double dres = dres_abs / (1.0 + c_norm);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    const double score = std::max({pres / opts.feasibility_tol, dres / opts.feasibility_tol, gap / opts.gap_tol});
    if (score < best_score) {
      best_score = score;
      best.x = x;
      best.y = y;
      best.objective = pobj;
      best.dual_objective = dobj;
      best.iterations = iter;
    }
    if (score < 1.0) return score;
    // Near the optimum the normal equations become ill-conditioned and the
    // residuals may stop improving; fall back to the best iterate seen.
    if (mu < 1e-16 * (1.0 + std::abs(pobj))) break;

    chol.clear();
    for (std::size_t j = 0; j < N; ++j) {
      inv_x[j] = 1.0 / x[j];
      inv_w[j] = 1.0 / w[j];
      const double t = 1.0 / (z[j] * inv_x[j] + v[j] * inv_w[j] + kPrimalReg);
      theta[j] = t;
      for (int q = pair_start[j]; q < pair_start[j + 1]; ++q) L[pair_pos[static_cast<std::size_t>(q)]] += t * pair_coef[static_cast<std::size_t>(q)];
      // Predictor targets.
      rxz[j] = -x[j] * z[j];
      rwv[j] = -w[j] * v[j];
    }
    for (std::size_t i = 0; i < M; ++i) L[diag_pos[i]] += kDualReg;
    chol.factor();

    direction(dx_a.data(), dz_a.data(), dv_a.data());
    const auto [ap, ad] = max_steps(N, x.data(), w.data(), dx_a.data(), z.data(), v.data(), dz_a.data(), dv_a.data());
    double comp_aff = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      comp_aff += (x[j] + ap * dx_a[j]) * (z[j] + ad * dz_a[j]) + (w[j] - ap * dx_a[j]) * (v[j] + ad * dv_a[j]);
    }
    const double mu_aff = comp_aff / (2.0 * static_cast<double>(n));
    const double ratio = mu_aff / mu;
    const double sigma_mu = ratio * ratio * ratio * mu;

    // Corrector.
    for (std::size_t j = 0; j < N; ++j) {
      rxz[j] = sigma_mu - x[j] * z[j] - dx_a[j] * dz_a[j];
      rwv[j] = sigma_mu - w[j] * v[j] + dx_a[j] * dv_a[j];
    }
    direction(dx.data(), dz.data(), dv.data());
    const auto [sp, sd] = max_steps(N, x.data(), w.data(), dx.data(), z.data(), v.data(), dz.data(), dv.data());
    const double step_p = std::min(1.0, step_factor * sp);
    const double step_d = std::min(1.0, step_factor * sd);
    for (std::size_t j = 0; j < N; ++j) {
      x[j] += step_p * dx[j];
      w[j] -= step_p * dx[j];
      z[j] += step_d * dz[j];
      v[j] += step_d * dv[j];
    }
    for (std::size_t i = 0; i < M; ++i) y[i] += step_d * dy[i];
  }
  return best_score;
}

}  // namespace

Solution solve(const Problem& p, const Options& opts) {
  // Long steps converge fastest but occasionally lose centrality on
  // degenerate storage chains and stall; shorter steps recover those.
  Solution best;
  double best_score = std::numeric_limits<double>::infinity();
  for (const double step_factor : {0.9995, 0.99, 0.9}) {
    Solution s;
    const double score = attempt(p, opts, step_factor, s);
    if (score < 1.0) return s;
    if (score < best_score) {
      best_score = score;
      best = std::move(s);
    }
  }
  if (best_score < 1e3) return best;
  throw Error(ErrorCode::SolverFailure, fmt::format("interior point method did not converge (residual score {:.3g})",
                                                    best_score));
}

}  // namespace lemsim::lp

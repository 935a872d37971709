// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/gmres.hpp"

#include <complex>

namespace nfsim
{

namespace
{

using cdouble = std::complex<double>;

// Complex Givens rotation zeroing b in (a, b).
void MakeGivens(cdouble a, cdouble b, double &c, cdouble &s)
{
  const double na = std::abs(a);
  const double nb = std::abs(b);
  if (nb == 0.0)
  {
    c = 1.0;
    s = 0.0;
    return;
  }
  if (na == 0.0)
  {
    c = 0.0;
    s = std::conj(b) / nb;
    return;
  }
  const double norm = std::hypot(na, nb);
  c = na / norm;
  s = (a / na) * std::conj(b) / norm;
}

struct ColumnState
{
  Eigen::MatrixXcd basis;  // n x (m + 1)
  Eigen::MatrixXcd hess;   // (m + 1) x m
  std::vector<double> cs;
  std::vector<cdouble> sn;
  Eigen::VectorXcd g;
  std::size_t steps = 0;
  bool done = false;
};

}  // namespace

GmresResult BlockGmres(const BlockOperator &apply, const Eigen::VectorXcd &inv_diag, const Eigen::MatrixXcd &b,
                       double tolerance, std::size_t max_iterations, std::size_t restart)
{
  const Eigen::Index n = b.rows();
  const Eigen::Index ncol = b.cols();
  const std::size_t m = std::max<std::size_t>(1, std::min<std::size_t>(restart, static_cast<std::size_t>(n)));

  GmresResult result;
  result.x = Eigen::MatrixXcd::Zero(n, ncol);
  Eigen::VectorXd bnorm(ncol);
  for (Eigen::Index j = 0; j < ncol; ++j)
  {
    bnorm(j) = b.col(j).norm();
  }

  auto precondition = [&](const Eigen::MatrixXcd &v) -> Eigen::MatrixXcd {
    return inv_diag.asDiagonal() * v;
  };

  while (true)
  {
    const Eigen::MatrixXcd r = b - apply(result.x);
    std::vector<Eigen::Index> active;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < ncol; ++j)
    {
      const double rel = bnorm(j) > 0.0 ? r.col(j).norm() / bnorm(j) : 0.0;
      worst = std::max(worst, rel);
      if (rel > tolerance)
      {
        active.push_back(j);
      }
    }
    result.residual_estimate = worst;
    if (active.empty())
    {
      result.converged = true;
      return result;
    }
    if (result.iterations >= max_iterations)
    {
      return result;
    }

    std::vector<ColumnState> state(active.size());
    for (std::size_t a = 0; a < active.size(); ++a)
    {
      auto &s = state[a];
      const Eigen::Index j = active[a];
      const double beta = r.col(j).norm();
      s.basis = Eigen::MatrixXcd::Zero(n, static_cast<Eigen::Index>(m + 1));
      s.hess = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(m));
      s.cs.assign(m, 1.0);
      s.sn.assign(m, 0.0);
      s.g = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m + 1));
      s.g(0) = beta;
      s.basis.col(0) = r.col(j) / beta;
    }

    for (std::size_t i = 0; i < m && result.iterations < max_iterations; ++i)
    {
      std::vector<std::size_t> running;
      for (std::size_t a = 0; a < state.size(); ++a)
      {
        if (!state[a].done)
        {
          running.push_back(a);
        }
      }
      if (running.empty())
      {
        break;
      }
      Eigen::MatrixXcd block(n, static_cast<Eigen::Index>(running.size()));
      for (std::size_t q = 0; q < running.size(); ++q)
      {
        block.col(static_cast<Eigen::Index>(q)) = state[running[q]].basis.col(static_cast<Eigen::Index>(i));
      }
      const Eigen::MatrixXcd w_block = apply(precondition(block));
      ++result.iterations;

      const auto ii = static_cast<Eigen::Index>(i);
      for (std::size_t q = 0; q < running.size(); ++q)
      {
        auto &s = state[running[q]];
        const Eigen::Index j = active[running[q]];
        Eigen::VectorXcd w = w_block.col(static_cast<Eigen::Index>(q));
        // Modified Gram-Schmidt with one reorthogonalization pass.
        for (int pass = 0; pass < 2; ++pass)
        {
          for (Eigen::Index k = 0; k <= ii; ++k)
          {
            const cdouble h = s.basis.col(k).dot(w);
            s.hess(k, ii) += h;
            w -= h * s.basis.col(k);
          }
        }
        const double hnext = w.norm();
        s.hess(ii + 1, ii) = hnext;
        if (hnext > 0.0)
        {
          s.basis.col(ii + 1) = w / hnext;
        }
        for (Eigen::Index k = 0; k < ii; ++k)
        {
          const auto uk = static_cast<std::size_t>(k);
          const cdouble t = s.cs[uk] * s.hess(k, ii) + s.sn[uk] * s.hess(k + 1, ii);
          s.hess(k + 1, ii) = -std::conj(s.sn[uk]) * s.hess(k, ii) + s.cs[uk] * s.hess(k + 1, ii);
          s.hess(k, ii) = t;
        }
        MakeGivens(s.hess(ii, ii), s.hess(ii + 1, ii), s.cs[i], s.sn[i]);
        s.hess(ii, ii) = s.cs[i] * s.hess(ii, ii) + s.sn[i] * s.hess(ii + 1, ii);
        s.hess(ii + 1, ii) = 0.0;
        s.g(ii + 1) = -std::conj(s.sn[i]) * s.g(ii);
        s.g(ii) = s.cs[i] * s.g(ii);
        s.steps = i + 1;
        // Stop a little below the target so the recomputed residual clears it.
        if (std::abs(s.g(ii + 1)) <= 0.5 * tolerance * bnorm(j) || hnext == 0.0)
        {
          s.done = true;
        }
      }
    }

    for (std::size_t a = 0; a < state.size(); ++a)
    {
      auto &s = state[a];
      if (s.steps == 0)
      {
        continue;
      }
      const auto k = static_cast<Eigen::Index>(s.steps);
      const Eigen::VectorXcd y =
          s.hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(s.g.head(k));
      result.x.col(active[a]) += precondition(s.basis.leftCols(k) * y);
    }
  }
}

}  // namespace nfsim

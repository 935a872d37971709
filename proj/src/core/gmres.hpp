// Copyright 2026 The nfsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace nfsim
{

struct GmresResult
{
  Eigen::MatrixXcd x;
  std::size_t iterations = 0;      // operator applications per column, counted in lockstep
  double residual_estimate = 0.0;  // max over columns of the Arnoldi residual estimate
  bool converged = false;
};

// Applies the operator to every column of the block.
using BlockOperator = std::function<Eigen::MatrixXcd(const Eigen::MatrixXcd &)>;

// Restarted GMRES, right-preconditioned by a diagonal, run on all right-hand sides in
// lockstep: each column keeps its own Krylov basis but every step applies the operator once
// to the block of still-active columns. Convergence is judged on the true relative
// residual at each restart.
GmresResult BlockGmres(const BlockOperator &apply, const Eigen::VectorXcd &inv_diag, const Eigen::MatrixXcd &b,
                       double tolerance, std::size_t max_iterations, std::size_t restart);

}  // namespace nfsim

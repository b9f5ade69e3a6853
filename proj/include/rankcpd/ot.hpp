#pragma once

#include "rankcpd/halton.hpp"

#include <Eigen/Dense>

#include <vector>

namespace rankcpd {

// Pairwise squared-Euclidean costs between two equally sized point sets.
struct CostMatrix {
    Eigen::MatrixXd entries;  // source_count x target_count, all >= 0

    int source_count() const { return static_cast<int>(entries.rows()); }
    int target_count() const { return static_cast<int>(entries.cols()); }
};

CostMatrix cost_matrix(const Eigen::MatrixXd& sources, const Eigen::MatrixXd& targets);
CostMatrix cost_matrix(const Eigen::MatrixXd& sources, const HaltonGrid& targets);

// Divides all entries by the maximum entry (no-op when the matrix is all
// zeros). Changes the meaning of the Sinkhorn regularizer accordingly.
CostMatrix normalize_cost(CostMatrix cost);

// Coupling between two uniform discrete measures of equal size N. Rows and
// columns each sum to 1/N up to marginal_tolerance; the exact plan
// (regularizer == 0) is a permutation scaled by 1/N.
struct TransportPlan {
    Eigen::MatrixXd coupling;
    double regularizer = 0.0;         // epsilon; 0 denotes the exact plan
    double marginal_tolerance = 0.0;  // achieved worst-case marginal violation
    bool converged = true;
    int iterations = 0;
};

// Optimal assignment row -> column for a square cost matrix, by shortest
// augmenting paths over dual potentials (Jonker-Volgenant family). Rows are
// processed in index order, which fixes the permutation deterministically
// among equal-cost optima. Throws std::invalid_argument on non-square or
// non-finite input.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

// Exact Kantorovich plan between uniform measures: the optimal coupling is a
// scaled permutation, obtained from solve_assignment.
TransportPlan solve_exact(const CostMatrix& cost);

struct SinkhornOptions {
    int max_iters = 10000;         // total sweeps across all epsilon levels
    double tolerance = 1e-9;       // absolute worst-case marginal violation
    bool epsilon_scaling = true;   // anneal from max(C)/2 down to epsilon
    double overrelaxation = 1.0;   // scaling exponent in [1, 2); 1 is plain Sinkhorn
};

// Entropy-regularized plan via stabilized Sinkhorn scaling: kernel-domain
// matvec sweeps with periodic absorption of the scalings into the dual
// potentials, and a log-sum-exp dual sweep whenever a denominator under- or
// overflows, so the iteration cannot produce non-finite values at any
// epsilon. On reaching max_iters the plan is still returned with
// converged == false and the achieved violation in marginal_tolerance.
TransportPlan solve_sinkhorn(const CostMatrix& cost, double epsilon,
                             const SinkhornOptions& options = {});

// Rows rescaled to sum exactly to 1. Throws std::runtime_error on a
// zero-sum row, which cannot occur for a feasible plan.
Eigen::MatrixXd row_normalize(const TransportPlan& plan);

// <C, P>, the transport cost attained by a plan.
double transport_cost(const CostMatrix& cost, const TransportPlan& plan);

}  // namespace rankcpd

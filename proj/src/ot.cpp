#include "rankcpd/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rankcpd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_square_finite(const Eigen::MatrixXd& cost, const char* where) {
    if (cost.rows() != cost.cols() || cost.rows() == 0) {
        throw std::invalid_argument(std::string(where) + ": cost matrix must be square and nonempty");
    }
    if (!cost.allFinite()) {
        throw std::invalid_argument(std::string(where) + ": cost matrix has non-finite entries");
    }
}

}  // namespace

CostMatrix cost_matrix(const Eigen::MatrixXd& sources, const Eigen::MatrixXd& targets) {
    if (sources.cols() != targets.cols()) {
        throw std::invalid_argument("cost_matrix: dimension mismatch between sources and targets");
    }
    if (sources.rows() != targets.rows()) {
        throw std::invalid_argument("cost_matrix: source and target counts differ");
    }
    const auto n = sources.rows();
    CostMatrix cost;
    cost.entries.resize(n, n);
    // ||x||^2 + ||y||^2 - 2 x.y, clamped at 0 against cancellation.
    const Eigen::VectorXd sq_s = sources.rowwise().squaredNorm();
    const Eigen::VectorXd sq_t = targets.rowwise().squaredNorm();
    cost.entries.noalias() = -2.0 * sources * targets.transpose();
    cost.entries.colwise() += sq_s;
    cost.entries.rowwise() += sq_t.transpose();
    cost.entries = cost.entries.cwiseMax(0.0);
    return cost;
}

CostMatrix cost_matrix(const Eigen::MatrixXd& sources, const HaltonGrid& targets) {
    return cost_matrix(sources, targets.points);
}

CostMatrix normalize_cost(CostMatrix cost) {
    const double max_entry = cost.entries.maxCoeff();
    if (max_entry > 0.0) {
        cost.entries /= max_entry;
    }
    return cost;
}

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
    require_square_finite(cost, "solve_assignment");
    const int n = static_cast<int>(cost.rows());

    // Row-major copy; the inner loop scans one row across all columns.
    std::vector<double> c(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            c[static_cast<std::size_t>(i) * n + j] = cost(i, j);
        }
    }

    // Shortest augmenting paths with dual potentials, 1-based with a
    // sentinel column 0. p[j] is the row matched to column j.
    std::vector<double>u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), char{0});
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            const double* row = c.data() + static_cast<std::size_t>(i0 - 1) * n;
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] != 0) {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    return row_to_col;
}

TransportPlan solve_exact(const CostMatrix& cost) {
    const std::vector<int> assignment = solve_assignment(cost.entries);
    const int n = static_cast<int>(assignment.size());

    TransportPlan plan;
    plan.coupling = Eigen::MatrixXd::Zero(n, n);
    const double mass = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        plan.coupling(i, assignment[i]) = mass;
    }
    plan.regularizer = 0.0;
    plan.marginal_tolerance = 0.0;
    plan.converged = true;
    plan.iterations = 0;
    return plan;
}

namespace {

// One exact log-domain dual sweep with max-centering; finite for any finite
// cost and any epsilon, used to recover whenever the kernel iteration
// under- or overflows.
void log_domain_sweep(const Eigen::MatrixXd& cost, double eps, double log_marginal,
                      Eigen::VectorXd& f, Eigen::VectorXd& g) {
    const auto n = cost.rows();
    Eigen::MatrixXd m(n, n);
    // f_i <- eps*log(a_i) - eps*LSE_j((g_j - C_ij)/eps)
    m = ((-cost).rowwise() + g.transpose()) / eps;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double rmax = m.row(i).maxCoeff();
        const double lse = rmax + std::log((m.row(i).array() - rmax).exp().sum());
        f(i) = eps * (log_marginal - lse);
    }
    // g_j <- eps*log(b_j) - eps*LSE_i((f_i - C_ij)/eps)
    m = ((-cost).colwise() + f) / eps;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double cmax = m.col(j).maxCoeff();
        const double lse = cmax + std::log((m.col(j).array() - cmax).exp().sum());
        g(j) = eps * (log_marginal - lse);
    }
}

}  // namespace

TransportPlan solve_sinkhorn(const CostMatrix& cost, double epsilon, const SinkhornOptions& options) {
    require_square_finite(cost.entries, "solve_sinkhorn");
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("solve_sinkhorn: epsilon must be positive");
    }
    if (!(options.tolerance > 0.0) || options.max_iters < 1) {
        throw std::invalid_argument("solve_sinkhorn: tolerance and max_iters must be positive");
    }
    if (!(options.overrelaxation >= 1.0) || options.overrelaxation >= 2.0) {
        throw std::invalid_argument("solve_sinkhorn: overrelaxation must lie in [1, 2)");
    }

    const Eigen::MatrixXd& C = cost.entries;
    const int n = static_cast<int>(C.rows());
    const double marginal = 1.0 / n;
    const double log_marginal = -std::log(static_cast<double>(n));

    // Annealing schedule: halve from max(C)/2 down to the target epsilon.
    std::vector<double> levels;
    const double cmax = C.maxCoeff();
    if (options.epsilon_scaling) {
        for (double e = cmax / 2.0; e > epsilon; e /= 2.0) {
            levels.push_back(e);
        }
    }
    levels.push_back(epsilon);

    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);  // absorbed dual potentials
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd u = Eigen::VectorXd::Ones(n);  // scalings on top of (f, g)
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    Eigen::MatrixXd K(n, n);
    Eigen::VectorXd kv(n), ktu(n);

    auto rebuild_kernel = [&](double eps) {
        K = ((((-C).colwise() + f).rowwise() + g.transpose()) / eps).array().exp();
    };
    auto absorb = [&](double eps) {
        f += eps * u.array().log().matrix();
        g += eps * v.array().log().matrix();
        u.setOnes();
        v.setOnes();
        rebuild_kernel(eps);
    };

    constexpr double kScaleLimit = 1e100;   // absorb once scalings pass this
    constexpr double kDenomFloor = 1e-250;  // below this a matvec is treated as underflow
    constexpr int kIntermediateCap = 200;   // sweep budget per annealing level

    int iters = 0;
    bool converged = false;
    for (std::size_t level = 0; level < levels.size(); ++level) {
        const double eps = levels[level];
        const bool final_level = (level + 1 == levels.size());
        const double level_tol =
            final_level ? options.tolerance : std::max(options.tolerance, 0.05 * marginal);

        rebuild_kernel(eps);
        int level_iters = 0;
        // Overrelaxation keeps the same fixed point; drop back to plain
        // scaling if the violation ever blows up instead of shrinking.
        double omega = options.overrelaxation;
        double previous_violation = kInf;
        while (iters < options.max_iters && (final_level || level_iters < kIntermediateCap)) {
            kv.noalias() = K * v;
            if (!kv.allFinite() || kv.minCoeff() < kDenomFloor) {
                log_domain_sweep(C, eps, log_marginal, f, g);
                u.setOnes();
                v.setOnes();
                rebuild_kernel(eps);
                ++iters;
                ++level_iters;
                continue;
            }
            // Row marginals of the current plan, before touching u.
            const double violation = (u.array() * kv.array() - marginal).abs().maxCoeff();
            if (violation <= level_tol) {
                if (!final_level) {
                    break;
                }
                // Columns must pass too before declaring convergence.
                ktu.noalias() = K.transpose() * u;
                const double col_violation = (v.array() * ktu.array() - marginal).abs().maxCoeff();
                if (col_violation <= level_tol) {
                    converged = true;
                    break;
                }
            }
            if (violation > 10.0 * previous_violation) {
                omega = 1.0;
            }
            previous_violation = std::min(previous_violation, violation);
            if (omega == 1.0) {
                u = (marginal / kv.array()).matrix();
            } else {
                u = (u.array().pow(1.0 - omega) * (marginal / kv.array()).pow(omega)).matrix();
            }
            ktu.noalias() = K.transpose() * u;
            if (!ktu.allFinite() || ktu.minCoeff() < kDenomFloor) {
                log_domain_sweep(C, eps, log_marginal, f, g);
                u.setOnes();
                v.setOnes();
                rebuild_kernel(eps);
                ++iters;
                ++level_iters;
                continue;
            }
            if (omega == 1.0) {
                v = (marginal / ktu.array()).matrix();
            } else {
                v = (v.array().pow(1.0 - omega) * (marginal / ktu.array()).pow(omega)).matrix();
            }
            ++iters;
            ++level_iters;

            if (u.maxCoeff() > kScaleLimit || v.maxCoeff() > kScaleLimit ||
                u.minCoeff() < 1.0 / kScaleLimit || v.minCoeff() < 1.0 / kScaleLimit) {
                absorb(eps);
            }
        }
        if (!final_level) {
            absorb(eps);
        }
    }

    TransportPlan plan;
    plan.coupling = K.cwiseProduct(u * v.transpose());
    plan.regularizer = epsilon;
    plan.iterations = iters;
    const Eigen::VectorXd row_sums = plan.coupling.rowwise().sum();
    const Eigen::RowVectorXd col_sums = plan.coupling.colwise().sum();
    plan.marginal_tolerance =
        std::max((row_sums.array() - marginal).abs().maxCoeff(),
                 (col_sums.array() - marginal).abs().maxCoeff());
    plan.converged = converged && plan.marginal_tolerance <= options.tolerance;
    return plan;
}

Eigen::MatrixXd row_normalize(const TransportPlan& plan) {
    const Eigen::VectorXd row_sums = plan.coupling.rowwise().sum();
    if ((row_sums.array() <= 0.0).any()) {
        throw std::runtime_error("row_normalize: plan has a zero-sum row (solver bug)");
    }
    return plan.coupling.array().colwise() / row_sums.array();
}

double transport_cost(const CostMatrix& cost, const TransportPlan& plan) {
    return cost.entries.cwiseProduct(plan.coupling).sum();
}

}  // namespace rankcpd

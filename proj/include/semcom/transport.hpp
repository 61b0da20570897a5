#pragma once

#include "semcom/camera.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace semcom::ot {

/// Pairwise Euclidean distances between equally sized point sets.
/// Zero diagonal and symmetry fall out when source == target.
struct CostMatrix {
  Eigen::MatrixXd d;
  int n() const { return int(d.rows()); }
};

CostMatrix cost_matrix(const std::vector<Vec2>& source,
                       const std::vector<Vec2>& target);

/// Element-wise exp(-c/eta). Entries lie in (0,1] for finite costs, but can
/// underflow to zero when c/eta is large; the cost-based relax_* overloads
/// below avoid that via shifted exponentials.
struct GibbsKernel {
  Eigen::MatrixXd k;
  double eta = 0.0;
  int n() const { return int(k.rows()); }
};

GibbsKernel gibbs_kernel(const CostMatrix& c, double eta);

enum class PlanKind { row_relaxed, col_relaxed, combined, sinkhorn, lp };
const char* plan_kind_name(PlanKind kind);

struct TransportPlan {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd p, q;
  double eta = 0.0;
  PlanKind kind = PlanKind::row_relaxed;
  int iterations = 0;    // sinkhorn only
  bool converged = true; // sinkhorn only

  int n() const { return int(matrix.rows()); }
  double cost(const CostMatrix& c) const;
};

Eigen::VectorXd uniform_marginal(int n);

/// Closed-form row-relaxed plan: row i of the kernel scaled to sum to p_i.
TransportPlan relax_rows(const GibbsKernel& kernel, const Eigen::VectorXd& p);
/// Closed-form column-relaxed plan: column j scaled to sum to q_j.
TransportPlan relax_cols(const GibbsKernel& kernel, const Eigen::VectorXd& q);

/// Same closed forms evaluated from the costs with a per-row (per-column)
/// shift before exponentiation. Mathematically identical, but immune to
/// kernel underflow at small eta; the denoiser always uses these.
TransportPlan relax_rows(const CostMatrix& c, double eta,
                         const Eigen::VectorXd& p);
TransportPlan relax_cols(const CostMatrix& c, double eta,
                         const Eigen::VectorXd& q);

/// Element-wise maximum of the two relaxed plans.
TransportPlan combine_max(const TransportPlan& tu, const TransportPlan& tv);

/// Row-normalized application: each source point maps to the plan-weighted
/// average of the targets.
std::vector<Vec2> barycentric_apply(const TransportPlan& plan,
                                    const std::vector<Vec2>& targets);

/// Doubly constrained entropic plan via alternating scaling; switches to
/// log-domain updates when exp(-c/eta) would underflow. Residual is the
/// total-variation distance of both marginals.
TransportPlan sinkhorn_full(const CostMatrix& c, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& q, double eta,
                            int max_iters = 10000, double tol = 1e-9);

/// Exact unregularized optimum by the transportation simplex with Bland's
/// rule. Deliberately refuses n > 8: it exists to check the fast paths.
TransportPlan lp_transport_oracle(const CostMatrix& c,
                                  const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& q);

/// Debug export: "n,eta,kind" header followed by matrix rows.
std::string plan_to_csv(const TransportPlan& plan);

} // namespace semcom::ot

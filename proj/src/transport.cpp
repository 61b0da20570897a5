#include "semcom/transport.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace semcom::ot {
namespace {

void check_marginal(const Eigen::VectorXd& m, const char* name) {
  if (m.size() == 0) throw std::invalid_argument("empty marginal");
  if ((m.array() < 0.0).any())
    throw std::invalid_argument(std::string(name) + " has negative entries");
  if (std::abs(m.sum() - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(name) + " must sum to 1");
}

void check_eta(double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
}

} // namespace

CostMatrix cost_matrix(const std::vector<Vec2>& source,
                       const std::vector<Vec2>& target) {
  if (source.empty() || source.size() != target.size())
    throw std::invalid_argument("cost_matrix needs equal nonempty point sets");
  const int n = int(source.size());
  CostMatrix c;
  c.d.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c.d(i, j) = (source[i] - target[j]).norm();
  if (!c.d.allFinite())
    throw std::invalid_argument("cost_matrix: non-finite coordinates");
  return c;
}

GibbsKernel gibbs_kernel(const CostMatrix& c, double eta) {
  check_eta(eta);
  GibbsKernel k;
  k.eta = eta;
  k.k = (-c.d / eta).array().exp();
  return k;
}

const char* plan_kind_name(PlanKind kind) {
  switch (kind) {
    case PlanKind::row_relaxed: return "row_relaxed";
    case PlanKind::col_relaxed: return "col_relaxed";
    case PlanKind::combined: return "combined";
    case PlanKind::sinkhorn: return "sinkhorn";
    case PlanKind::lp: return "lp";
  }
  return "unknown";
}

double TransportPlan::cost(const CostMatrix& c) const {
  if (c.n() != n()) throw std::invalid_argument("cost: size mismatch");
  return (matrix.array() * c.d.array()).sum();
}

Eigen::VectorXd uniform_marginal(int n) {
  if (n < 1) throw std::invalid_argument("marginal needs n >= 1");
  return Eigen::VectorXd::Constant(n, 1.0 / n);
}

TransportPlan relax_rows(const GibbsKernel& kernel, const Eigen::VectorXd& p) {
  if (kernel.n() != p.size())
    throw std::invalid_argument("relax_rows: size mismatch");
  check_marginal(p, "p");
  TransportPlan plan;
  plan.eta = kernel.eta;
  plan.kind = PlanKind::row_relaxed;
  plan.p = p;
  plan.q = Eigen::VectorXd();
  plan.matrix = kernel.k;
  for (int i = 0; i < kernel.n(); ++i) {
    const double row_sum = plan.matrix.row(i).sum();
    if (!(row_sum > 0.0))
      throw std::invalid_argument(
          "relax_rows: kernel row " + std::to_string(i) +
          " sums to zero (underflow? use the cost-based overload)");
    plan.matrix.row(i) *= p(i) / row_sum;
  }
  return plan;
}

TransportPlan relax_cols(const GibbsKernel& kernel, const Eigen::VectorXd& q) {
  if (kernel.n() != q.size())
    throw std::invalid_argument("relax_cols: size mismatch");
  check_marginal(q, "q");
  TransportPlan plan;
  plan.eta = kernel.eta;
  plan.kind = PlanKind::col_relaxed;
  plan.q = q;
  plan.matrix = kernel.k;
  for (int j = 0; j < kernel.n(); ++j) {
    const double col_sum = plan.matrix.col(j).sum();
    if (!(col_sum > 0.0))
      throw std::invalid_argument(
          "relax_cols: kernel column " + std::to_string(j) +
          " sums to zero (underflow? use the cost-based overload)");
    plan.matrix.col(j) *= q(j) / col_sum;
  }
  return plan;
}

TransportPlan relax_rows(const CostMatrix& c, double eta,
                         const Eigen::VectorXd& p) {
  check_eta(eta);
  if (c.n() != p.size()) throw std::invalid_argument("relax_rows: size mismatch");
  check_marginal(p, "p");
  TransportPlan plan;
  plan.eta = eta;
  plan.kind = PlanKind::row_relaxed;
  plan.p = p;
  plan.matrix.resize(c.n(), c.n());
  for (int i = 0; i < c.n(); ++i) {
    // shift by the row minimum: the scaling cancels any per-row factor
    const double m = c.d.row(i).minCoeff();
    Eigen::ArrayXd w = ((m - c.d.row(i).transpose().array()) / eta).exp();
    plan.matrix.row(i) = (p(i) / w.sum()) * w.transpose();
  }
  return plan;
}

TransportPlan relax_cols(const CostMatrix& c, double eta,
                         const Eigen::VectorXd& q) {
  check_eta(eta);
  if (c.n() != q.size()) throw std::invalid_argument("relax_cols: size mismatch");
  check_marginal(q, "q");
  TransportPlan plan;
  plan.eta = eta;
  plan.kind = PlanKind::col_relaxed;
  plan.q = q;
  plan.matrix.resize(c.n(), c.n());
  for (int j = 0; j < c.n(); ++j) {
    const double m = c.d.col(j).minCoeff();
    Eigen::ArrayXd w = ((m - c.d.col(j).array()) / eta).exp();
    plan.matrix.col(j) = (q(j) / w.sum()) * w;
  }
  return plan;
}

TransportPlan combine_max(const TransportPlan& tu, const TransportPlan& tv) {
  if (tu.n() != tv.n())
    throw std::invalid_argument("combine_max: shape mismatch");
  if (tu.eta != tv.eta)
    throw std::invalid_argument("combine_max: eta mismatch");
  TransportPlan plan;
  plan.eta = tu.eta;
  plan.kind = PlanKind::combined;
  plan.p = tu.p.size() ? tu.p : tv.p;
  plan.q = tv.q.size() ? tv.q : tu.q;
  plan.matrix = tu.matrix.cwiseMax(tv.matrix);
  return plan;
}

std::vector<Vec2> barycentric_apply(const TransportPlan& plan,
                                    const std::vector<Vec2>& targets) {
  if (int(targets.size()) != plan.n())
    throw std::invalid_argument("barycentric_apply: size mismatch");
  std::vector<Vec2> out(targets.size());
  for (int i = 0; i < plan.n(); ++i) {
    const double row_sum = plan.matrix.row(i).sum();
    if (!(row_sum > 0.0))
      throw std::invalid_argument("barycentric_apply: zero row sum at row " +
                                  std::to_string(i));
    Vec2 acc = Vec2::Zero();
    for (int j = 0; j < plan.n(); ++j) acc += plan.matrix(i, j) * targets[j];
    out[i] = acc / row_sum;
  }
  return out;
}

namespace {

double marginal_residual(const Eigen::MatrixXd& t, const Eigen::VectorXd& p,
                         const Eigen::VectorXd& q) {
  const double row_tv = (t.rowwise().sum() - p).cwiseAbs().sum();
  const double col_tv = (t.colwise().sum().transpose() - q).cwiseAbs().sum();
  return row_tv + col_tv;
}

TransportPlan sinkhorn_scaling(const CostMatrix& c, const Eigen::VectorXd& p,
                               const Eigen::VectorXd& q, double eta,
                               int max_iters, double tol) {
  const int n = c.n();
  const Eigen::MatrixXd kernel = (-c.d / eta).array().exp();
  Eigen::VectorXd u = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  TransportPlan plan;
  plan.converged = false;
  for (int it = 1; it <= max_iters; ++it) {
    u = p.cwiseQuotient(kernel * v);
    v = q.cwiseQuotient(kernel.transpose() * u);
    plan.iterations = it;
    const Eigen::MatrixXd t =
        u.asDiagonal() * kernel * v.asDiagonal();
    if (marginal_residual(t, p, q) < tol) {
      plan.converged = true;
      plan.matrix = t;
      break;
    }
    if (it == max_iters) plan.matrix = t;
  }
  return plan;
}

TransportPlan sinkhorn_log_domain(const CostMatrix& c,
                                  const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& q, double eta,
                                  int max_iters, double tol) {
  const int n = c.n();
  const Eigen::ArrayXd log_p = p.array().log();
  const Eigen::ArrayXd log_q = q.array().log();
  Eigen::ArrayXd f = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd g = Eigen::ArrayXd::Zero(n);

  auto lse_rows = [](const Eigen::ArrayXXd& a) -> Eigen::ArrayXd {
    // log-sum-exp over each row, stabilized by the row max
    const Eigen::ArrayXd m = a.rowwise().maxCoeff();
    return m + (a.colwise() - m).exp().rowwise().sum().log();
  };

  TransportPlan plan;
  plan.converged = false;
  Eigen::ArrayXXd scaled(n, n);
  for (int it = 1; it <= max_iters; ++it) {
    scaled = ((-c.d).array().rowwise() + g.transpose()) / eta;
    f = eta * (log_p - lse_rows(scaled));
    scaled = ((-c.d).array().colwise() + f).transpose() / eta;
    g = eta * (log_q - lse_rows(scaled));
    plan.iterations = it;
    Eigen::MatrixXd t =
        ((((-c.d).array().colwise() + f).rowwise() + g.transpose()) / eta)
            .exp()
            .matrix();
    if (marginal_residual(t, p, q) < tol) {
      plan.converged = true;
      plan.matrix = std::move(t);
      break;
    }
    if (it == max_iters) plan.matrix = std::move(t);
  }
  return plan;
}

} // namespace

TransportPlan sinkhorn_full(const CostMatrix& c, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& q, double eta,
                            int max_iters, double tol) {
  check_eta(eta);
  if (c.n() != p.size() || c.n() != q.size())
    throw std::invalid_argument("sinkhorn_full: size mismatch");
  check_marginal(p, "p");
  check_marginal(q, "q");
  if ((p.array() <= 0.0).any() || (q.array() <= 0.0).any())
    throw std::invalid_argument("sinkhorn_full needs strictly positive marginals");

  // Plain scaling underflows once c/eta exceeds ~700; well before that the
  // products K*v lose all precision, so switch to log-domain updates early.
  const bool log_domain = c.d.maxCoeff() / eta > 200.0;
  TransportPlan plan = log_domain
                           ? sinkhorn_log_domain(c, p, q, eta, max_iters, tol)
                           : sinkhorn_scaling(c, p, q, eta, max_iters, tol);
  plan.eta = eta;
  plan.kind = PlanKind::sinkhorn;
  plan.p = p;
  plan.q = q;
  return plan;
}

namespace {

struct Cell {
  int i, j;
};

// Spanning-tree walk for the transportation simplex: find the unique path of
// basis cells linking row r0 to column c0.
bool find_cycle_path(int r0, int c0, const std::vector<Cell>& basis, int n,
                     std::vector<Cell>& path) {
  // adjacency: rows 0..n-1, cols n..2n-1
  std::vector<std::vector<std::pair<int, int>>> adj(2 * n); // (node, cell idx)
  for (int k = 0; k < int(basis.size()); ++k) {
    adj[basis[k].i].push_back({n + basis[k].j, k});
    adj[n + basis[k].j].push_back({basis[k].i, k});
  }
  std::vector<int> parent_node(2 * n, -1), parent_cell(2 * n, -1);
  std::vector<bool> seen(2 * n, false);
  std::vector<int> stack{r0};
  seen[r0] = true;
  while (!stack.empty()) {
    int node = stack.back();
    stack.pop_back();
    if (node == n + c0) break;
    for (auto [next, cell] : adj[node]) {
      if (seen[next]) continue;
      seen[next] = true;
      parent_node[next] = node;
      parent_cell[next] = cell;
      stack.push_back(next);
    }
  }
  if (!seen[n + c0]) return false;
  path.clear();
  for (int node = n + c0; node != r0; node = parent_node[node])
    path.push_back(basis[parent_cell[node]]);
  std::reverse(path.begin(), path.end());
  return true;
}

} // namespace

TransportPlan lp_transport_oracle(const CostMatrix& c,
                                  const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& q) {
  const int n = c.n();
  if (n > 8)
    throw std::invalid_argument(
        "lp_transport_oracle is a test oracle and refuses n > 8");
  if (p.size() != n || q.size() != n)
    throw std::invalid_argument("lp_transport_oracle: size mismatch");
  check_marginal(p, "p");
  check_marginal(q, "q");

  Eigen::MatrixXd alloc = Eigen::MatrixXd::Zero(n, n);
  std::vector<Cell> basis;
  basis.reserve(2 * n - 1);

  // Northwest-corner start; ties move down and leave a zero basis cell, so
  // the basis always has exactly 2n-1 entries.
  {
    Eigen::VectorXd a = p, b = q;
    int i = 0, j = 0;
    while (true) {
      const double x = std::min(a(i), b(j));
      alloc(i, j) = x;
      basis.push_back({i, j});
      a(i) -= x;
      b(j) -= x;
      if (i == n - 1 && j == n - 1) break;
      if (a(i) <= 0.0 && i < n - 1)
        ++i;
      else if (j < n - 1)
        ++j;
      else
        ++i;
    }
  }

  const int max_pivots = 4000;
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    // duals from the basis tree
    Eigen::VectorXd u = Eigen::VectorXd::Constant(n, NAN);
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, NAN);
    u(0) = 0.0;
    for (bool progress = true; progress;) {
      progress = false;
      for (const Cell& cell : basis) {
        const bool know_u = !std::isnan(u(cell.i));
        const bool know_v = !std::isnan(v(cell.j));
        if (know_u && !know_v) {
          v(cell.j) = c.d(cell.i, cell.j) - u(cell.i);
          progress = true;
        } else if (!know_u && know_v) {
          u(cell.i) = c.d(cell.i, cell.j) - v(cell.j);
          progress = true;
        }
      }
    }

    // Bland's rule: first cell (lexicographic) with negative reduced cost
    int ei = -1, ej = -1;
    for (int i = 0; i < n && ei < 0; ++i)
      for (int j = 0; j < n; ++j) {
        if (alloc(i, j) == 0.0 &&
            c.d(i, j) - u(i) - v(j) < -1e-12) {
          bool in_basis = false;
          for (const Cell& cell : basis)
            if (cell.i == i && cell.j == j) in_basis = true;
          if (!in_basis) {
            ei = i;
            ej = j;
            break;
          }
        }
      }
    if (ei < 0) break; // optimal

    std::vector<Cell> path;
    if (!find_cycle_path(ei, ej, basis, n, path))
      throw std::logic_error("transportation simplex: basis is not a tree");

    // entering cell is +, then alternate along the path
    double theta = std::numeric_limits<double>::infinity();
    int leave_idx = -1;
    for (int k = 0; k < int(path.size()); ++k) {
      if (k % 2 == 0) { // minus position
        if (alloc(path[k].i, path[k].j) < theta) {
          theta = alloc(path[k].i, path[k].j);
          leave_idx = k;
        }
      }
    }
    alloc(ei, ej) += theta;
    for (int k = 0; k < int(path.size()); ++k) {
      if (k % 2 == 0)
        alloc(path[k].i, path[k].j) -= theta;
      else
        alloc(path[k].i, path[k].j) += theta;
    }
    const Cell leaving = path[leave_idx];
    alloc(leaving.i, leaving.j) = 0.0;
    for (auto it = basis.begin(); it != basis.end(); ++it) {
      if (it->i == leaving.i && it->j == leaving.j) {
        basis.erase(it);
        break;
      }
    }
    basis.push_back({ei, ej});
  }

  TransportPlan plan;
  plan.matrix = alloc;
  plan.p = p;
  plan.q = q;
  plan.eta = 0.0;
  plan.kind = PlanKind::lp;
  return plan;
}

std::string plan_to_csv(const TransportPlan& plan) {
  std::ostringstream out;
  out << "n,eta,kind\n"
      << plan.n() << ',' << plan.eta << ',' << plan_kind_name(plan.kind)
      << '\n';
  for (int i = 0; i < plan.n(); ++i) {
    for (int j = 0; j < plan.n(); ++j) {
      if (j) out << ',';
      out << plan.matrix(i, j);
    }
    out << '\n';
  }
  return out.str();
}

} // namespace semcom::ot

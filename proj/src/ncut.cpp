#include "lidarcut/ncut.hpp"

#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace lidarcut {

std::vector<std::uint32_t> connected_components(const ProxyGraph& graph) {
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> comp(graph.n, kUnset);
  std::uint32_t next = 0;
  std::vector<std::uint32_t> stack;
  for (std::size_t s = 0; s < graph.n; ++s) {
    if (comp[s] != kUnset) continue;
    comp[s] = next;
    stack.assign(1, static_cast<std::uint32_t>(s));
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      const auto nb = graph.neighbors_of(u);
      const auto w = graph.weights_of(u);
      for (std::size_t k = 0; k < nb.size(); ++k)
        if (w[k] > 0.0 && comp[nb[k]] == kUnset) {
          comp[nb[k]] = next;
          stack.push_back(nb[k]);
        }
    }
    ++next;
  }
  return comp;
}

ProxyGraph induced_subgraph(const ProxyGraph& graph, std::span<const std::uint32_t> nodes) {
  std::vector<std::int64_t> local(graph.n, -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) local[nodes[k]] = static_cast<std::int64_t>(k);
  ProxyGraph g;
  g.n = nodes.size();
  g.row_begin.assign(g.n + 1, 0);
  g.node_to_point.reserve(g.n);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto u = nodes[k];
    const auto nb = graph.neighbors_of(u);
    const auto w = graph.weights_of(u);
    for (std::size_t e = 0; e < nb.size(); ++e)
      if (local[nb[e]] >= 0) {
        g.neighbors.push_back(static_cast<std::uint32_t>(local[nb[e]]));
        g.weights.push_back(w[e]);
      }
    g.row_begin[k + 1] = g.neighbors.size();
    g.node_to_point.push_back(graph.node_to_point.empty() ? u : graph.node_to_point[u]);
  }
  return g;
}

namespace {

/// x -> x - D^{-1/2} W D^{-1/2} x
class NormalizedLaplacian {
 public:
  explicit NormalizedLaplacian(const ProxyGraph& g) : g_(g), inv_sqrt_(static_cast<Eigen::Index>(g.n)) {
    for (std::size_t i = 0; i < g.n; ++i) {
      const double d = g.degree(i);
      if (!(d > 0.0)) throw std::invalid_argument("fiedler_vector: node " + std::to_string(i) + " has zero degree");
      inv_sqrt_(static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(d);
    }
  }

  void apply(const Eigen::VectorXd& z, Eigen::VectorXd& out) const {
    const Eigen::VectorXd sz = inv_sqrt_.cwiseProduct(z);
    out.resize(z.size());
    for (std::size_t i = 0; i < g_.n; ++i) {
      const auto nb = g_.neighbors_of(i);
      const auto w = g_.weights_of(i);
      double acc = 0.0;
      for (std::size_t k = 0; k < nb.size(); ++k) acc += w[k] * sz(nb[k]);
      const auto ii = static_cast<Eigen::Index>(i);
      out(ii) = z(ii) - inv_sqrt_(ii) * acc;
    }
  }

  const Eigen::VectorXd& inv_sqrt_degree() const { return inv_sqrt_; }

 private:
  const ProxyGraph& g_;
  Eigen::VectorXd inv_sqrt_;
};

/// Generalized residual of (lambda, y = D^{-1/2} z):
/// ||D^{1/2}(L z - lambda z)|| / ||D^{1/2} z||.
double generalized_residual(const NormalizedLaplacian& op, const Eigen::VectorXd& z, double lambda) {
  Eigen::VectorXd lz;
  op.apply(z, lz);
  const Eigen::VectorXd sqrt_d = op.inv_sqrt_degree().cwiseInverse();
  const double num = sqrt_d.cwiseProduct(lz - lambda * z).norm();
  const double den = sqrt_d.cwiseProduct(z).norm();
  return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

void orthogonalize(Eigen::VectorXd& w, const Eigen::VectorXd& u0, const Eigen::MatrixXd& basis,
                   Eigen::Index cols) {
  for (int pass = 0; pass < 2; ++pass) {
    w -= u0 * u0.dot(w);
    if (cols > 0) {
      const Eigen::VectorXd h = basis.leftCols(cols).transpose() * w;
      w -= basis.leftCols(cols) * h;
    }
  }
}

}  // namespace

FiedlerResult fiedler_vector(const ProxyGraph& graph, const FiedlerParams& params) {
  const auto n = static_cast<Eigen::Index>(graph.n);
  if (n < 2) throw std::invalid_argument("fiedler_vector: need at least 2 nodes");
  const NormalizedLaplacian op(graph);
  Eigen::VectorXd u0 = op.inv_sqrt_degree().cwiseInverse();
  u0.normalize();

  const Eigen::Index dim = n - 1;  // dimension of the deflated space
  const Eigen::Index cap = std::min<Eigen::Index>(dim, 600);
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto random_vector = [&] {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = uni(rng);
    return v;
  };

  Eigen::VectorXd start = random_vector();
  orthogonalize(start, u0, Eigen::MatrixXd(), 0);
  start.normalize();

  int total = 0;
  double best_res = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_z = start;

  Eigen::MatrixXd V(n, cap);
  std::vector<double> alpha, beta;
  Eigen::VectorXd w;
  while (total < params.max_iter) {
    V.col(0) = start;
    alpha.clear();
    beta.clear();
    for (Eigen::Index j = 0; j < cap; ++j) {
      op.apply(V.col(j), w);
      alpha.push_back(V.col(j).dot(w));
      orthogonalize(w, u0, V, j + 1);
      double b = w.norm();
      ++total;
      const bool last = j + 1 == cap || total >= params.max_iter;
      bool breakdown = false;
      if (!last && b <= 1e-13) {
        // Invariant subspace reached: continue the basis with a fresh direction.
        breakdown = true;
        Eigen::VectorXd fresh = random_vector();
        orthogonalize(fresh, u0, V, j + 1);
        if (fresh.norm() <= 1e-10) break;
        w = fresh;
        b = 0.0;
      }
      beta.push_back(b);

      const bool check = last || breakdown || (j + 1) % 5 == 0 || j + 1 == dim;
      if (check) {
        const Eigen::Index k = j + 1;
        Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), k);
        Eigen::VectorXd sub(std::max<Eigen::Index>(k - 1, 0));
        for (Eigen::Index i = 0; i + 1 < k; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        const Eigen::VectorXd s = tri.eigenvectors().col(0);
        const double ritz_est = std::abs(b * s(k - 1));
        if (ritz_est <= params.tol * 1e-2 || last || k == dim) {
          Eigen::VectorXd z = V.leftCols(k) * s;
          orthogonalize(z, u0, Eigen::MatrixXd(), 0);
          z.normalize();
          Eigen::VectorXd lz;
          op.apply(z, lz);
          const double lambda = z.dot(lz);
          const double res = generalized_residual(op, z, lambda);
          if (res < best_res) best_res = res, best_z = z;
          if (res <= params.tol) {
            FiedlerResult out;
            out.lambda2 = std::max(lambda, 0.0);
            out.y = op.inv_sqrt_degree().cwiseProduct(z);
            Eigen::Index imax = 0;
            for (Eigen::Index i = 1; i < n; ++i)
              if (std::abs(out.y(i)) > std::abs(out.y(imax))) imax = i;
            if (out.y(imax) < 0) out.y = -out.y;
            out.residual = res;
            out.iterations = total;
            return out;
          }
          if (last || k == dim) break;
        }
      }
      if (j + 1 < cap) V.col(j + 1) = w / (b > 0.0 ? b : w.norm());
    }
    // Explicit restart from the best Ritz vector seen so far.
    start = best_z;
  }
  throw FiedlerNonConvergence("fiedler_vector: no convergence after " + std::to_string(total) +
                                  " iterations (best residual " + std::to_string(best_res) + ")",
                              best_res);
}

double ncut_value(const ProxyGraph& graph, std::span<const std::uint8_t> assignment) {
  if (assignment.size() != graph.n) throw std::invalid_argument("ncut_value: assignment length mismatch");
  double cut = 0.0, assoc_a = 0.0, assoc_b = 0.0;
  std::size_t na = 0;
  for (std::size_t i = 0; i < graph.n; ++i) {
    const auto nb = graph.neighbors_of(i);
    const auto w = graph.weights_of(i);
    const bool in_a = assignment[i] != 0;
    na += in_a;
    for (std::size_t k = 0; k < nb.size(); ++k) {
      (in_a ? assoc_a : assoc_b) += w[k];
      if (in_a && !assignment[nb[k]]) cut += w[k];
    }
  }
  if (na == 0 || na == graph.n) throw std::invalid_argument("ncut_value: both sides must be non-empty");
  const double ta = assoc_a > 0.0 ? cut / assoc_a : 0.0;
  const double tb = assoc_b > 0.0 ? cut / assoc_b : 0.0;
  return ta + tb;
}

CutResult best_split(const ProxyGraph& graph, std::span<const double> y, int sweep_points, double lambda2) {
  const std::size_t n = graph.n;
  if (y.size() != n) throw std::invalid_argument("best_split: vector length mismatch");
  if (n < 2) throw std::invalid_argument("best_split: need at least 2 nodes");
  if (sweep_points < 1) throw std::invalid_argument("best_split: sweep_points must be positive");
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> thresholds;
  for (int k = 1; k <= sweep_points; ++k) {
    const double q = static_cast<double>(k) / (sweep_points + 1);
    auto idx = static_cast<std::size_t>(std::llround(q * static_cast<double>(n - 1)));
    idx = std::min(idx, n - 2);
    const double t = sorted[idx];
    if (t >= sorted.back()) continue;  // would put every node on one side
    if (thresholds.empty() || thresholds.back() != t) thresholds.push_back(t);
  }
  if (thresholds.empty()) throw std::invalid_argument("best_split: y is constant, no split exists");

  CutResult best;
  best.lambda2 = lambda2;
  std::size_t best_imbalance = 0;
  std::vector<std::uint8_t> assign(n);
  for (double t : thresholds) {
    std::size_t na = 0;
    for (std::size_t i = 0; i < n; ++i) na += (assign[i] = y[i] <= t);
    const double v = ncut_value(graph, assign);
    const std::size_t imbalance = na > n - na ? na - (n - na) : (n - na) - na;
    const double tie = 1e-12 * std::max(1.0, std::abs(best.ncut_value));
    const bool first = best.assignment.empty();
    bool take = first || v < best.ncut_value - tie;
    if (!take && std::abs(v - best.ncut_value) <= tie) take = imbalance < best_imbalance;
    if (take) {
      best.assignment = assign;
      best.ncut_value = v;
      best.threshold = t;
      best_imbalance = imbalance;
    }
  }
  return best;
}

InstanceLabeling recursive_ncut(const ProxyGraph& graph, const NcutParams& params) {
  InstanceLabeling out;
  out.labels.assign(graph.n, 0);
  if (graph.n == 0) return out;
  const double share_floor = params.min_share * static_cast<double>(graph.n);

  struct Terminal {
    std::vector<std::uint32_t> nodes;
    RegionTrace trace;
  };
  std::vector<Terminal> terminals;
  std::vector<std::vector<std::uint32_t>> stack;

  auto push_components = [&](const ProxyGraph& g, std::span<const std::uint32_t> global_ids) {
    const auto comp = connected_components(g);
    const std::uint32_t count = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
    std::vector<std::vector<std::uint32_t>> parts(count);
    for (std::size_t i = 0; i < comp.size(); ++i) parts[comp[i]].push_back(global_ids[i]);
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) stack.push_back(std::move(*it));
    return count;
  };

  std::vector<std::uint32_t> all(graph.n);
  std::iota(all.begin(), all.end(), 0u);
  push_components(graph, all);

  while (!stack.empty()) {
    std::vector<std::uint32_t> region = std::move(stack.back());
    stack.pop_back();
    RegionTrace trace{region.front(), region.size()};
    if (region.size() < std::max<std::size_t>(params.min_points, 2)) {
      trace.reason = StopReason::TooSmall;
      terminals.push_back({std::move(region), trace});
      continue;
    }
    const ProxyGraph sub = induced_subgraph(graph, region);
    if (push_components(sub, region) > 1) continue;
    stack.pop_back();  // the single component just pushed is `region` itself

    FiedlerResult eig;
    try {
      eig = fiedler_vector(sub, params.solver);
    } catch (const FiedlerNonConvergence& e) {
      spdlog::warn("ncut: region at node {} ({} nodes) kept whole: {}", region.front(), region.size(), e.what());
      trace.reason = StopReason::SolverFailure;
      terminals.push_back({std::move(region), trace});
      continue;
    }
    trace.lambda2 = eig.lambda2;
    if (eig.lambda2 > params.eig_threshold) {
      trace.reason = StopReason::Eigenvalue;
      terminals.push_back({std::move(region), trace});
      continue;
    }
    const CutResult cut = best_split(sub, std::span<const double>(eig.y.data(), static_cast<std::size_t>(eig.y.size())),
                                     params.sweep_points, eig.lambda2);
    std::vector<std::uint32_t> a, b;
    for (std::size_t i = 0; i < region.size(); ++i) (cut.assignment[i] ? a : b).push_back(region[i]);
    if (static_cast<double>(std::min(a.size(), b.size())) < share_floor) {
      trace.reason = StopReason::MinShare;
      terminals.push_back({std::move(region), trace});
      continue;
    }
    const bool a_first = a.front() < b.front();
    stack.push_back(a_first ? std::move(b) : std::move(a));
    stack.push_back(a_first ? std::move(a) : std::move(b));
  }

  std::sort(terminals.begin(), terminals.end(),
            [](const Terminal& x, const Terminal& y) { return x.nodes.front() < y.nodes.front(); });
  out.count = static_cast<std::uint32_t>(terminals.size());
  for (std::size_t t = 0; t < terminals.size(); ++t) {
    for (auto u : terminals[t].nodes) out.labels[u] = static_cast<std::uint32_t>(t + 1);
    out.regions.push_back(terminals[t].trace);
  }
  return out;
}

BruteForceCut brute_force_min_ncut(const ProxyGraph& graph) {
  const std::size_t n = graph.n;
  if (n < 2 || n > 14) throw std::invalid_argument("brute_force_min_ncut: need 2 <= n <= 14");
  BruteForceCut best;
  std::vector<std::uint8_t> assign(n);
  const std::uint32_t limit = 1u << (n - 1);
  for (std::uint32_t mask = 1; mask < limit; ++mask) {
    for (std::size_t i = 0; i + 1 < n; ++i) assign[i] = (mask >> i) & 1u;
    assign[n - 1] = 0;
    const double v = ncut_value(graph, assign);
    ++best.evaluated;
    if (v < best.value) {
      best.value = v;
      best.assignment = assign;
    }
  }
  return best;
}

}  // namespace lidarcut

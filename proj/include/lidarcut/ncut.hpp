#pragma once

#include "lidarcut/errors.hpp"
#include "lidarcut/graph.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace lidarcut {

/// Component id per node over positive-weight edges; ids are numbered in
/// order of each component's lowest node.
std::vector<std::uint32_t> connected_components(const ProxyGraph& graph);

struct FiedlerParams {
  double tol = 1e-8;
  int max_iter = 5000;
  std::uint64_t seed = 0;
};

struct FiedlerResult {
  double lambda2 = 0.0;
  Eigen::VectorXd y;  // D-normalized: y' D y = 1, D-orthogonal to the constant vector
  double residual = 0.0;  // ||(D - W) y - lambda2 D y|| / ||D y||
  int iterations = 0;
};

class FiedlerNonConvergence : public NumericalError {
 public:
  FiedlerNonConvergence(const std::string& what, double best_residual)
      : NumericalError(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

/// Second-smallest solution of (D - W) y = lambda D y for a connected graph
/// with n >= 2. Lanczos with full reorthogonalization on the normalized
/// Laplacian, deflating the known null vector D^{1/2} 1.
FiedlerResult fiedler_vector(const ProxyGraph& graph, const FiedlerParams& params = {});

/// cut(A,B)/assoc(A,V) + cut(A,B)/assoc(B,V); side A = nodes with assignment 1.
double ncut_value(const ProxyGraph& graph, std::span<const std::uint8_t> assignment);

struct CutResult {
  std::vector<std::uint8_t> assignment;  // 1 = side with y <= threshold
  double ncut_value = 0.0;
  double lambda2 = std::numeric_limits<double>::quiet_NaN();
  double threshold = 0.0;
};

/// Sweeps thresholds at evenly spaced quantiles of y and keeps the minimum
/// normalized cut. Ties go to the more balanced split, then the lower threshold.
CutResult best_split(const ProxyGraph& graph, std::span<const double> y, int sweep_points = 64,
                     double lambda2 = std::numeric_limits<double>::quiet_NaN());

struct NcutParams {
  double eig_threshold = 0.075;
  double min_share = 0.01;
  std::size_t min_points = 2;
  int sweep_points = 64;
  FiedlerParams solver;
};

/// Why a region stopped being cut.
enum class StopReason : std::uint8_t { TooSmall, Eigenvalue, MinShare, SolverFailure };

struct RegionTrace {
  std::uint32_t first_node = 0;  // lowest node in the region
  std::size_t size = 0;
  double lambda2 = std::numeric_limits<double>::quiet_NaN();
  StopReason reason = StopReason::TooSmall;
};

/// Per-node instance ids 1..K (every node is labeled).
struct InstanceLabeling {
  std::vector<std::uint32_t> labels;
  std::uint32_t count = 0;
  std::vector<RegionTrace> regions;  // one per instance, in id order
};

InstanceLabeling recursive_ncut(const ProxyGraph& graph, const NcutParams& params = {});

struct BruteForceCut {
  std::vector<std::uint8_t> assignment;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evaluated = 0;
};

/// Exhaustive minimum normalized cut over all 2^(n-1) - 1 bipartitions (2 <= n <= 14).
BruteForceCut brute_force_min_ncut(const ProxyGraph& graph);

/// Graph induced by `nodes` (ascending), renumbered 0..k-1.
ProxyGraph induced_subgraph(const ProxyGraph& graph, std::span<const std::uint32_t> nodes);

}  // namespace lidarcut

#pragma once

#include "lidarcut/graph.hpp"
#include "lidarcut/merge.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace lidarcut {

/// Overlap counts between predicted and ground-truth instances. Points with
/// gt id 0 are ignored entirely; predictions covering only ignored points
/// (and pred id 0) have no row.
struct MatchMatrix {
  std::vector<std::uint32_t> pred_ids, gt_ids;  // original ids, ascending
  std::vector<std::size_t> pred_sizes, gt_sizes;
  std::vector<std::size_t> intersections;  // pred-major

  std::size_t num_pred() const { return pred_ids.size(); }
  std::size_t num_gt() const { return gt_ids.size(); }
  std::size_t inter(std::size_t p, std::size_t g) const { return intersections[p * gt_ids.size() + g]; }
  double iou(std::size_t p, std::size_t g) const;
};

MatchMatrix match_matrix(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> gt);

struct PrecisionRecall {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  std::size_t true_positives = 0;
};

/// Greedy one-to-one matching by descending IoU (ties by pred, then gt index).
PrecisionRecall precision_recall_f1(const MatchMatrix& m, double iou_thr = 0.5);

struct ApResult {
  double ap = 0.0;
  bool defined = true;  // false when there are no gt instances
};

/// All-point interpolated AP. `confidence` is indexed like m.pred_ids.
ApResult average_precision(const MatchMatrix& m, std::span<const double> confidence, double iou_thr);

/// Mean AP over IoU thresholds 0.50, 0.55, ..., 0.95.
ApResult average_precision_global(const MatchMatrix& m, std::span<const double> confidence);

double s_assoc(const MatchMatrix& m);

/// Intra-instance edge statistics per label 1..K (index k-1); labels are per graph node.
std::vector<InstanceCohesion> instance_cohesion(const ProxyGraph& graph, std::span<const std::uint32_t> labels);

/// Mean intra-instance edge weight per instance (0.5 for singletons).
std::vector<double> proposal_confidence(const ProxyGraph& graph, std::span<const std::uint32_t> labels);

struct EvalReport {
  double precision = 0, recall = 0, f1 = 0, ap25 = 0, ap50 = 0, ap_global = 0, s_assoc = 0;
  std::size_t num_pred = 0, num_gt = 0, true_positives = 0;
  bool ap_defined = true;

  nlohmann::json to_json() const;
};

/// `confidence_by_id[k-1]` scores predicted instance k; empty means 1 for all.
EvalReport evaluate(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> gt,
                    std::span<const double> confidence_by_id = {});

}  // namespace lidarcut

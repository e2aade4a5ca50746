#include "lidarcut/eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace lidarcut {

double MatchMatrix::iou(std::size_t p, std::size_t g) const {
  const std::size_t i = inter(p, g);
  if (i == 0) return 0.0;
  return static_cast<double>(i) / static_cast<double>(pred_sizes[p] + gt_sizes[g] - i);
}

MatchMatrix match_matrix(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> gt) {
  if (pred.size() != gt.size()) throw std::invalid_argument("match_matrix: labelings differ in length");
  std::map<std::uint32_t, std::size_t> prow, gcol;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == 0) continue;
    gcol.emplace(gt[i], 0);
    if (pred[i] != 0) prow.emplace(pred[i], 0);
  }
  MatchMatrix m;
  for (auto& [id, idx] : prow) idx = m.pred_ids.size(), m.pred_ids.push_back(id);
  for (auto& [id, idx] : gcol) idx = m.gt_ids.size(), m.gt_ids.push_back(id);
  m.pred_sizes.assign(m.pred_ids.size(), 0);
  m.gt_sizes.assign(m.gt_ids.size(), 0);
  m.intersections.assign(m.pred_ids.size() * m.gt_ids.size(), 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == 0) continue;
    const std::size_t g = gcol[gt[i]];
    ++m.gt_sizes[g];
    if (pred[i] == 0) continue;
    const std::size_t p = prow[pred[i]];
    ++m.pred_sizes[p];
    ++m.intersections[p * m.gt_ids.size() + g];
  }
  return m;
}

PrecisionRecall precision_recall_f1(const MatchMatrix& m, double iou_thr) {
  struct Pair {
    double iou;
    std::size_t p, g;
  };
  std::vector<Pair> pairs;
  for (std::size_t p = 0; p < m.num_pred(); ++p)
    for (std::size_t g = 0; g < m.num_gt(); ++g) {
      const double v = m.iou(p, g);
      if (v > 0.0 && v >= iou_thr) pairs.push_back({v, p, g});
    }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.iou > b.iou; });
  std::vector<std::uint8_t> pu(m.num_pred(), 0), gu(m.num_gt(), 0);
  PrecisionRecall r;
  for (const auto& pr : pairs) {
    if (pu[pr.p] || gu[pr.g]) continue;
    pu[pr.p] = gu[pr.g] = 1;
    ++r.true_positives;
  }
  const auto tp = static_cast<double>(r.true_positives);
  r.precision = m.num_pred() ? tp / static_cast<double>(m.num_pred()) : 0.0;
  r.recall = m.num_gt() ? tp / static_cast<double>(m.num_gt()) : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

ApResult average_precision(const MatchMatrix& m, std::span<const double> confidence, double iou_thr) {
  if (confidence.size() != m.num_pred())
    throw std::invalid_argument("average_precision: one confidence per prediction required");
  if (m.num_gt() == 0) return {0.0, false};
  std::vector<std::size_t> order(m.num_pred());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return confidence[a] > confidence[b]; });

  std::vector<std::uint8_t> matched(m.num_gt(), 0);
  std::vector<double> precision, recall;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t p = order[k];
    double best = -1.0;
    std::size_t best_g = 0;
    for (std::size_t g = 0; g < m.num_gt(); ++g) {
      if (matched[g]) continue;
      const double v = m.iou(p, g);
      if (v > 0.0 && v >= iou_thr && v > best) best = v, best_g = g;
    }
    if (best >= 0.0) {
      matched[best_g] = 1;
      ++tp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(m.num_gt()));
  }
  // Precision envelope, then area under the step curve.
  for (std::size_t k = precision.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t k = 0; k < precision.size(); ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return {ap, true};
}

ApResult average_precision_global(const MatchMatrix& m, std::span<const double> confidence) {
  double sum = 0.0;
  for (int k = 0; k < 10; ++k) {
    const ApResult r = average_precision(m, confidence, (50.0 + 5.0 * k) / 100.0);
    if (!r.defined) return r;
    sum += r.ap;
  }
  return {sum / 10.0, true};
}

double s_assoc(const MatchMatrix& m) {
  if (m.num_gt() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t g = 0; g < m.num_gt(); ++g) {
    double acc = 0.0;
    for (std::size_t p = 0; p < m.num_pred(); ++p) {
      const std::size_t i = m.inter(p, g);
      if (i) acc += static_cast<double>(i) * m.iou(p, g);
    }
    total += acc / static_cast<double>(m.gt_sizes[g]);
  }
  return total / static_cast<double>(m.num_gt());
}

std::vector<InstanceCohesion> instance_cohesion(const ProxyGraph& graph, std::span<const std::uint32_t> labels) {
  if (labels.size() != graph.n) throw std::invalid_argument("instance_cohesion: labels not aligned with graph");
  std::uint32_t k = 0;
  for (auto l : labels) k = std::max(k, l);
  std::vector<InstanceCohesion> out(k);
  for (const auto& e : graph.edges()) {
    const auto la = labels[e.a];
    if (la == 0 || la != labels[e.b]) continue;
    out[la - 1].weight_sum += e.w;
    ++out[la - 1].edges;
  }
  return out;
}

std::vector<double> proposal_confidence(const ProxyGraph& graph, std::span<const std::uint32_t> labels) {
  const auto coh = instance_cohesion(graph, labels);
  std::vector<double> out(coh.size());
  for (std::size_t i = 0; i < coh.size(); ++i) out[i] = coh[i].score();
  return out;
}

nlohmann::json EvalReport::to_json() const {
  return {{"precision", precision}, {"recall", recall}, {"f1", f1},
          {"ap25", ap25},           {"ap50", ap50},     {"ap_global", ap_global},
          {"s_assoc", s_assoc},     {"num_pred", num_pred}, {"num_gt", num_gt},
          {"true_positives", true_positives}, {"ap_defined", ap_defined}};
}

EvalReport evaluate(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> gt,
                    std::span<const double> confidence_by_id) {
  const MatchMatrix m = match_matrix(pred, gt);
  std::vector<double> conf(m.num_pred(), 1.0);
  if (!confidence_by_id.empty())
    for (std::size_t p = 0; p < m.num_pred(); ++p) {
      const auto id = m.pred_ids[p];
      if (id > confidence_by_id.size())
        throw std::invalid_argument("evaluate: no confidence for instance " + std::to_string(id));
      conf[p] = confidence_by_id[id - 1];
    }
  EvalReport r;
  const PrecisionRecall pr = precision_recall_f1(m, 0.5);
  r.precision = pr.precision;
  r.recall = pr.recall;
  r.f1 = pr.f1;
  r.true_positives = pr.true_positives;
  const ApResult a25 = average_precision(m, conf, 0.25);
  r.ap25 = a25.ap;
  r.ap50 = average_precision(m, conf, 0.5).ap;
  r.ap_global = average_precision_global(m, conf).ap;
  r.ap_defined = a25.defined;
  r.s_assoc = s_assoc(m);
  r.num_pred = m.num_pred();
  r.num_gt = m.num_gt();
  return r;
}

}  // namespace lidarcut

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "lidarcut/dbscan.hpp"
#include "lidarcut/eval.hpp"
#include "lidarcut/features.hpp"
#include "lidarcut/io.hpp"
#include "lidarcut/ncut.hpp"
#include "lidarcut/pipeline.hpp"
#include "lidarcut/scene.hpp"
#include "lidarcut/synth.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <spdlog/spdlog.h>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace lidarcut;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& why) {
    if (pass) detail.str("");
    pass = false;
    detail << why << "; ";
  }
  void check(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- graphs

void eigensolver(Outcome& o) {
  std::mt19937_64 rng(2024);
  double solve_s = 0.0, worst_rel = 0.0, worst_res = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng() % 199;
    const ProxyGraph g = testutil::random_connected_graph(rng, n, std::min(1.0, 4.0 / static_cast<double>(n)));
    const auto t0 = Clock::now();
    const FiedlerResult r = fiedler_vector(g);
    solve_s += since(t0);
    const testutil::DenseEigen want = testutil::dense_fiedler(g);
    const double err = std::abs(r.lambda2 - want.lambda2) / std::max(1.0, want.lambda2);
    worst_rel = std::max(worst_rel, err);
    o.check(err <= 1e-6, "lambda2 mismatch on graph " + std::to_string(t));

    const Eigen::MatrixXd w = testutil::dense_weights(g);
    const Eigen::VectorXd d = w.rowwise().sum();
    const Eigen::VectorXd dy = d.cwiseProduct(r.y);
    const double res = ((dy - w * r.y) - r.lambda2 * dy).norm() / dy.norm();
    worst_res = std::max(worst_res, res);
    o.check(res <= 1e-8 * 1.0001, "residual above tolerance on graph " + std::to_string(t));
    o.check(std::abs(r.y.dot(dy) - 1.0) <= 1e-9, "y not D-normalized on graph " + std::to_string(t));
    o.check(std::abs(dy.sum()) <= 1e-8 * r.y.norm() * d.norm(), "y not D-orthogonal to 1 on graph " + std::to_string(t));
  }
  o.check(solve_s < 5.0, "solver time " + fmt_num(solve_s) + " s");
  if (o.pass)
    o.detail << "200 graphs, max rel lambda2 error " << fmt_num(worst_rel) << ", max residual " << fmt_num(worst_res)
             << ", " << fmt_num(solve_s) << " s";
}

void ncut_envelope(Outcome& o) {
  std::mt19937_64 rng(77);
  int close = 0;
  double worst = 1.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 3 + rng() % 10;
    const ProxyGraph g = testutil::random_connected_graph(rng, n, 0.35);
    const double opt = oracle::min_ncut(testutil::dense_weights(g));
    const FiedlerResult r = fiedler_vector(g);
    const CutResult c = best_split(g, std::span<const double>(r.y.data(), n));
    worst = std::max(worst, c.ncut_value / opt);
    o.check(c.ncut_value <= 2.0 * opt + 1e-12, "sweep above twice optimum on graph " + std::to_string(t));
    close += c.ncut_value <= 1.05 * opt || c.ncut_value - opt <= 1e-9;
  }
  o.check(close >= 95, "only " + std::to_string(close) + "/100 within 5%");
  if (o.pass) o.detail << close << "/100 within 5%, worst ratio " << fmt_num(worst);
}

void scale_invariance(Outcome& o) {
  std::mt19937_64 rng(91);
  for (int t = 0; t < 20; ++t) {
    const ProxyGraph g = t % 2 ? testutil::clustered_graph(rng, 8 + t, 10 + t / 2, 1 + t % 3, 0.02)
                               : testutil::random_connected_graph(rng, 30 + t, 0.12);
    const auto base = testutil::canonical(recursive_ncut(g).labels);
    for (double alpha : {1e-3, 1e3})
      o.check(testutil::canonical(recursive_ncut(g.scaled(alpha)).labels) == base,
              "fixture " + std::to_string(t) + " differs at alpha " + fmt_num(alpha));
  }
  if (o.pass) o.detail << "20 fixtures identical at alpha 1e-3, 1, 1e3";
}

// ---------------------------------------------------------------- scenes

SceneSpec suite_spec(std::uint64_t seed, bool touching) {
  SceneSpec s;
  s.seed = seed;
  s.n_objects = 8 + static_cast<int>(seed % 8);
  s.min_gap = 2.0;
  s.cameras = false;
  s.touching_pairs = touching;
  if (touching) {
    s.pair_gap = 0.3;
    s.embed_scale = 3.0;
    s.embed_noise = 0.1;
  }
  return s;
}

PipelineConfig config_for(Preset p) {
  PipelineConfig c;
  c.preset = p;
  c.workers = 1;
  return c;
}

std::vector<SyntheticScene>& gap_scenes() {
  static std::vector<SyntheticScene> scenes = [] {
    std::vector<SyntheticScene> v;
    for (std::uint64_t s = 0; s < 10; ++s) v.push_back(generate_scene(suite_spec(s, false)));
    return v;
  }();
  return scenes;
}

std::vector<SyntheticScene>& pair_scenes() {
  static std::vector<SyntheticScene> scenes = [] {
    std::vector<SyntheticScene> v;
    for (std::uint64_t s = 0; s < 10; ++s) v.push_back(generate_scene(suite_spec(s, true)));
    return v;
  }();
  return scenes;
}

std::map<std::uint64_t, RunResult> gap_runs;
std::map<std::uint64_t, double> pair_f1_sp;

void geometric_recovery(Outcome& o) {
  double slowest = 0.0, min_sa = 1.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const SyntheticScene& scene = gap_scenes()[s];
    const PipelineInputs in = inputs_from_scene(scene);
    const auto t0 = Clock::now();
    RunResult r = run_pipeline(config_for(Preset::S), in);
    const double secs = since(t0);
    slowest = std::max(slowest, secs);
    const EvalReport& e = *r.report;
    min_sa = std::min(min_sa, e.s_assoc);
    const std::string tag = "seed " + std::to_string(s);
    o.check(e.precision == 1.0 && e.recall == 1.0 && e.f1 == 1.0 && e.ap50 == 1.0,
            tag + ": P " + fmt_num(e.precision) + " R " + fmt_num(e.recall) + " F1 " + fmt_num(e.f1) + " AP50 " +
                fmt_num(e.ap50));
    o.check(e.s_assoc >= 0.99, tag + ": S_assoc " + fmt_num(e.s_assoc));
    o.check(secs < 30.0, tag + ": " + fmt_num(secs) + " s");
    gap_runs.emplace(s, std::move(r));
  }
  if (o.pass)
    o.detail << "10 seeds, P=R=F1=AP50=1, min S_assoc " << fmt_num(min_sa) << ", slowest " << fmt_num(slowest) << " s";
}

void feature_discrimination(Outcome& o) {
  double max_s = 0.0, min_sp = 1.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const PipelineInputs in = inputs_from_scene(pair_scenes()[s]);
    const double f1_s = run_pipeline(config_for(Preset::S), in).report->f1;
    PipelineConfig sp = config_for(Preset::SP);
    sp.theta_p = 0.5;
    const double f1_sp = run_pipeline(sp, in).report->f1;
    pair_f1_sp[s] = f1_sp;
    max_s = std::max(max_s, f1_s);
    min_sp = std::min(min_sp, f1_sp);
    o.check(f1_s < 0.9, "seed " + std::to_string(s) + ": S F1 " + fmt_num(f1_s));
    o.check(f1_sp >= 0.95, "seed " + std::to_string(s) + ": S+P F1 " + fmt_num(f1_sp));
  }
  o.detail << "10 seeds, S F1 max " << fmt_num(max_s) << ", S+P F1 min " << fmt_num(min_sp);
}

// Map points of the predicted instance that best covers each object.
std::vector<std::uint32_t> best_cover(const std::vector<std::uint32_t>& pred, const std::vector<std::uint32_t>& gt,
                                      std::uint32_t object) {
  std::map<std::uint32_t, std::size_t> counts;
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (gt[i] == object && pred[i]) ++counts[pred[i]];
  std::uint32_t id = 0;
  std::size_t best = 0;
  for (auto [p, c] : counts)
    if (c > best) best = c, id = p;
  std::vector<std::uint32_t> members;
  if (id == 0) return members;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == id) members.push_back(static_cast<std::uint32_t>(i));
  return members;
}

void merging_consistency(Outcome& o) {
  std::size_t compared = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const SyntheticScene& scene = gap_scenes()[s];
    const std::string tag = "seed " + std::to_string(s);
    PipelineConfig multi = config_for(Preset::S);
    auto it = gap_runs.find(s);
    const RunResult many = it != gap_runs.end() ? it->second : run_pipeline(multi, inputs_from_scene(scene));
    PipelineConfig single = config_for(Preset::S);
    single.chunk_edge = 1000.0;
    single.chunk_stride = 1000.0;
    const RunResult one = run_pipeline(single, inputs_from_scene(scene));
    o.check(many.chunks.size() == 3, tag + ": " + std::to_string(many.chunks.size()) + " chunks");
    o.check(one.chunks.size() == 1, tag + ": single run has " + std::to_string(one.chunks.size()) + " chunks");

    const auto chunks = extract_chunks(scene.map, {multi.chunk_edge, multi.chunk_stride, multi.ncut_voxel});
    for (const auto& obj : scene.objects) {
      bool contained = false;
      for (const auto& c : chunks) {
        bool all = true;
        for (std::size_t i = 0; i < scene.gt.size() && all; ++i)
          if (scene.gt[i] == obj.id) all = c.contains(scene.map.cloud.points[i]);
        contained = contained || all;
      }
      if (!contained) continue;
      ++compared;
      const auto a = best_cover(many.segmentation.labels, scene.gt, obj.id);
      const auto b = best_cover(one.segmentation.labels, scene.gt, obj.id);
      o.check(!a.empty() && a == b, tag + ": object " + std::to_string(obj.id) + " differs");
    }
  }
  o.check(compared > 0, "no contained objects");
  if (o.pass) o.detail << compared << " contained objects identical across 10 seeds";
}

// ---------------------------------------------------------------- metrics

struct RandomCase {
  std::vector<std::uint32_t> pred, gt;
  std::vector<double> conf_by_id;
};

RandomCase random_case(std::mt19937_64& rng) {
  RandomCase c;
  const std::size_t n = 20 + rng() % 181;
  const std::uint32_t kg = 1 + rng() % 7, kp = 1 + rng() % 7;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    c.gt.push_back(u(rng) < 0.1 ? 0 : static_cast<std::uint32_t>(i * kg / n) + 1);
    std::uint32_t p = static_cast<std::uint32_t>(i * kp / n) + 1;
    if (u(rng) < 0.15) p = static_cast<std::uint32_t>(rng() % (kp + 1));
    c.pred.push_back(p);
  }
  for (std::uint32_t k = 0; k < kp; ++k) c.conf_by_id.push_back(std::round(u(rng) * 4) / 4);
  return c;
}

void metric_oracles(Outcome& o) {
  std::mt19937_64 rng(313);
  const double thresholds[] = {0.25, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
  double worst = 0.0;
  auto near = [&](double got, double want, const std::string& what) {
    worst = std::max(worst, std::abs(got - want));
    o.check(std::abs(got - want) <= 1e-12, what + " " + fmt_num(got) + " vs " + fmt_num(want));
  };
  for (int t = 0; t < 50; ++t) {
    const RandomCase c = random_case(rng);
    const MatchMatrix m = match_matrix(c.pred, c.gt);
    std::vector<double> conf;
    std::map<std::uint32_t, double> conf_map;
    for (auto id : m.pred_ids) {
      conf.push_back(c.conf_by_id[id - 1]);
      conf_map[id] = c.conf_by_id[id - 1];
    }
    const std::string tag = "case " + std::to_string(t);
    const oracle::Overlaps ov = oracle::overlaps(c.pred, c.gt);
    const double tp = static_cast<double>(oracle::optimal_true_positives(c.pred, c.gt, 0.5));
    const double p = ov.preds.empty() ? 0.0 : tp / static_cast<double>(ov.preds.size());
    const double r = ov.gts.empty() ? 0.0 : tp / static_cast<double>(ov.gts.size());
    const double f1 = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    const PrecisionRecall pr = precision_recall_f1(m, 0.5);
    near(pr.precision, p, tag + " P");
    near(pr.recall, r, tag + " R");
    near(pr.f1, f1, tag + " F1");
    near(s_assoc(m), oracle::s_assoc(c.pred, c.gt), tag + " S_assoc");
    double mean = 0.0;
    for (double thr : thresholds) {
      const double want = oracle::average_precision(c.pred, c.gt, conf_map, thr);
      near(average_precision(m, conf, thr).ap, want, tag + " AP@" + fmt_num(thr));
      if (thr >= 0.5) mean += want;
    }
    near(average_precision_global(m, conf).ap, mean / 10.0, tag + " AP");
  }

  std::vector<std::uint32_t> gt(100, 1), split(100);
  for (int i = 0; i < 100; ++i) split[i] = i < 50 ? 1 : 2;
  o.check(s_assoc(match_matrix(split, gt)) == 0.5, "split S_assoc example");
  const std::vector<std::uint32_t> g6{1, 1, 1, 1, 0, 0}, fp_first{1, 2, 2, 2, 0, 0};
  o.check(average_precision(match_matrix(fp_first, g6), std::vector<double>{0.9, 0.1}, 0.5).ap == 0.5,
          "FP-first AP example");
  if (o.pass) o.detail << "50 labelings, max deviation " << fmt_num(worst) << "; hand examples exact";
}

// ---------------------------------------------------------------- baseline

void baseline_sanity(Outcome& o) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng() % 300;
    std::uniform_real_distribution<double> u(0.0, 2.0 + static_cast<double>(t % 5) * 2.0);
    std::vector<Eigen::Vector3d> pts(n);
    for (auto& p : pts) p = {u(rng), u(rng), u(rng) * 0.3};
    const double eps = 0.3 + 0.1 * static_cast<double>(t % 6);
    const std::size_t min_pts = 1 + t % 6;
    const Points lib_pts(pts.begin(), pts.end());
    const auto got = euclidean_cluster(lib_pts, {eps, min_pts}).labels;
    o.check(got == oracle::dbscan(pts, eps, min_pts), "random set " + std::to_string(t) + " differs");
  }
  double min_gap_f1 = 1.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    PipelineConfig c = config_for(Preset::S);
    c.method = "dbscan";
    c.dbscan.eps = 1.0;
    const double f1 = run_pipeline(c, inputs_from_scene(gap_scenes()[s])).report->f1;
    min_gap_f1 = std::min(min_gap_f1, f1);
    o.check(f1 == 1.0, "min-gap seed " + std::to_string(s) + ": F1 " + fmt_num(f1));
  }
  double max_pair = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    PipelineConfig c = config_for(Preset::S);
    c.method = "dbscan";
    c.dbscan.eps = 1.0;
    const PipelineInputs in = inputs_from_scene(pair_scenes()[s]);
    const double f1 = run_pipeline(c, in).report->f1;
    auto it = pair_f1_sp.find(s);
    const double sp = it != pair_f1_sp.end() ? it->second : run_pipeline(config_for(Preset::SP), in).report->f1;
    max_pair = std::max(max_pair, f1);
    o.check(f1 < sp, "touching seed " + std::to_string(s) + ": DBSCAN F1 " + fmt_num(f1) + " vs S+P " + fmt_num(sp));
  }
  if (o.pass)
    o.detail << "100 sets exact; min-gap F1 min " << fmt_num(min_gap_f1) << "; touching-pair F1 max "
             << fmt_num(max_pair);
}

// ---------------------------------------------------------------- formats

float random_float(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> bits;
  float f;
  do f = std::bit_cast<float>(bits(rng));
  while (!std::isfinite(f));
  return f;
}

void format_round_trips(Outcome& o) {
  const auto dir = testutil::temp_dir("acceptance_formats");
  std::mt19937_64 rng(99);
  auto same_file = [&](const fs::path& a, const fs::path& b, const std::string& what) {
    o.check(read_bytes(a) == read_bytes(b), what + " rewrite not byte-identical");
  };
  for (int t = 0; t < 10; ++t) {
    const std::string tag = " trial " + std::to_string(t);
    const std::size_t n = static_cast<std::size_t>(t) * 41;

    PointCloud scan;
    for (std::size_t i = 0; i < n; ++i) {
      scan.points.emplace_back(random_float(rng), random_float(rng), random_float(rng));
      scan.intensity.push_back(random_float(rng));
    }
    write_scan(dir / "a.bin", scan);
    const PointCloud scan_back = load_scan(dir / "a.bin");
    o.check(scan_back.points == scan.points && scan_back.size() == scan.size(), "scan" + tag);
    for (std::size_t i = 0; i < n && i < scan_back.size(); ++i)
      o.check(std::bit_cast<std::uint32_t>(scan_back.intensity[i]) == std::bit_cast<std::uint32_t>(scan.intensity[i]),
              "scan intensity" + tag);
    write_scan(dir / "b.bin", scan_back);
    same_file(dir / "a.bin", dir / "b.bin", "scan" + tag);

    std::normal_distribution<double> g(0.0, 10.0);
    std::vector<RigidPose> poses(1 + t);
    for (auto& p : poses) {
      p.rotation = Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng)).normalized().toRotationMatrix();
      p.translation = {g(rng) * 100, g(rng), g(rng) * 1e-3};
    }
    write_poses(dir / "a.txt", poses);
    const auto poses_back = load_poses(dir / "a.txt");
    bool poses_ok = poses_back.size() == poses.size();
    for (std::size_t i = 0; poses_ok && i < poses.size(); ++i)
      poses_ok = poses_back[i].rotation == poses[i].rotation && poses_back[i].translation == poses[i].translation;
    o.check(poses_ok, "poses" + tag);
    write_poses(dir / "b.txt", poses_back);
    same_file(dir / "a.txt", dir / "b.txt", "poses" + tag);

    std::vector<std::uint32_t> ids(n);
    for (auto& v : ids) v = static_cast<std::uint32_t>(rng() & 0xFFFF);
    write_instance_labels(dir / "a.label", ids);
    const auto ids_back = load_instance_labels(dir / "a.label");
    o.check(ids_back == ids, "labels" + tag);
    write_instance_labels(dir / "b.label", ids_back);
    same_file(dir / "a.label", dir / "b.label", "labels" + tag);

    FeatureChannel ch(t % 2 ? ChannelKind::Image : ChannelKind::Point, 1 + t % 5, n);
    for (auto& v : ch.values) v = static_cast<float>(std::ldexp(g(rng), t % 7));
    for (std::size_t i = 0; i < ch.rows(); i += 5) ch.set_absent(i);
    write_feature_file(dir / "a.aifb", ch);
    const FeatureChannel ch_back = load_feature_file(dir / "a.aifb");
    bool ch_ok = ch_back.present == ch.present && ch_back.dim == ch.dim && ch_back.kind == ch.kind;
    for (std::size_t i = 0; ch_ok && i < ch.rows(); ++i)
      if (ch.is_present(i))
        for (std::size_t k = 0; k < ch.dim; ++k) ch_ok = ch_ok && ch_back.row(i)[k] == ch.row(i)[k];
    o.check(ch_ok, "AIFB" + tag);
    write_feature_file(dir / "b.aifb", ch_back);
    same_file(dir / "a.aifb", dir / "b.aifb", "AIFB" + tag);

    FeatureMapGrid grid;
    grid.rows = 1 + t % 4;
    grid.cols = 1 + t;
    grid.dim = 1 + t % 3;
    grid.scale = 0.5f + static_cast<float>(t);
    for (std::uint32_t k = 0; k < grid.rows * grid.cols * grid.dim; ++k) grid.values.push_back(random_float(rng));
    write_grid(dir / "a.aigr", grid);
    const FeatureMapGrid grid_back = load_grid(dir / "a.aigr");
    o.check(std::equal(grid.values.begin(), grid.values.end(), grid_back.values.begin(), grid_back.values.end(),
                       [](float a, float b) { return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b); }) &&
                grid_back.rows == grid.rows && grid_back.cols == grid.cols && grid_back.dim == grid.dim &&
                grid_back.scale == grid.scale,
            "grid" + tag);
    write_grid(dir / "b.aigr", grid_back);
    same_file(dir / "a.aigr", dir / "b.aigr", "grid" + tag);

    std::vector<PlyVertex> verts(n);
    for (auto& v : verts) {
      v.x = random_float(rng), v.y = random_float(rng), v.z = random_float(rng);
      const auto c = rng();
      v.color = {static_cast<std::uint8_t>(c), static_cast<std::uint8_t>(c >> 8), static_cast<std::uint8_t>(c >> 16)};
    }
    write_ply(dir / "a.ply", verts);
    const auto verts_back = load_ply(dir / "a.ply");
    bool ply_ok = verts_back.size() == verts.size();
    for (std::size_t i = 0; ply_ok && i < verts.size(); ++i)
      ply_ok = std::bit_cast<std::uint32_t>(verts_back[i].x) == std::bit_cast<std::uint32_t>(verts[i].x) &&
               std::bit_cast<std::uint32_t>(verts_back[i].y) == std::bit_cast<std::uint32_t>(verts[i].y) &&
               std::bit_cast<std::uint32_t>(verts_back[i].z) == std::bit_cast<std::uint32_t>(verts[i].z) &&
               verts_back[i].color == verts[i].color;
    o.check(ply_ok, "PLY" + tag);
    write_ply(dir / "b.ply", verts_back);
    same_file(dir / "a.ply", dir / "b.ply", "PLY" + tag);
  }
  if (o.pass) o.detail << "scan, pose, label, AIFB, grid, PLY: 10 fuzzed fixtures each, bit-exact";
}

// ---------------------------------------------------------------- determinism

void determinism(Outcome& o) {
  const auto dir = testutil::temp_dir("acceptance_determinism");
  SceneSpec spec;
  spec.seed = 17;
  spec.n_objects = 8;
  const SyntheticScene scene = generate_scene(spec);
  write_scene(scene, dir);
  PipelineConfig c;
  c.preset = Preset::SPI;
  c.seed = 5;
  c.paths.scans_dir = (dir / "scans").string();
  c.paths.poses = (dir / "poses.txt").string();
  c.paths.point_features = (dir / "point_features.aifb").string();
  c.paths.cameras = (dir / "cameras.txt").string();
  c.paths.grids_dir = (dir / "grids").string();
  c.paths.gt = (dir / "gt.label").string();
  const unsigned n_workers = 4;
  std::vector<std::vector<std::uint8_t>> files;
  for (auto [name, workers] : {std::pair{"w1a", 1u}, std::pair{"w1b", 1u}, std::pair{"wNa", n_workers},
                               std::pair{"wNb", n_workers}}) {
    c.workers = workers;
    c.paths.output_dir = (dir / name).string();
    run(c);
    files.push_back(read_bytes(dir / name / "instances.label"));
  }
  o.check(!files[0].empty(), "empty label file");
  for (std::size_t k = 1; k < files.size(); ++k) o.check(files[k] == files[0], "run " + std::to_string(k) + " differs");
  if (o.pass) o.detail << "preset S+P+I, 4 runs at 1 and " << n_workers << " workers byte-identical (" << files[0].size()
                       << " bytes)";
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
      {"eigensolver-correctness", eigensolver},
      {"ncut-optimality-envelope", ncut_envelope},
      {"scale-invariance", scale_invariance},
      {"geometric-recovery", geometric_recovery},
      {"feature-discrimination", feature_discrimination},
      {"merging-consistency", merging_consistency},
      {"metric-oracles", metric_oracles},
      {"baseline-sanity", baseline_sanity},
      {"format-round-trips", format_round_trips},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::string detail = o.detail.str();
    if (detail.size() > 400) detail = detail.substr(0, 400) + "...";
    std::printf("%s %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", name, since(t0), detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed ? 1 : 0;
}

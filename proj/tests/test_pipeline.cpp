#include "lidarcut/container.hpp"
#include "lidarcut/errors.hpp"
#include "lidarcut/io.hpp"
#include "lidarcut/pipeline.hpp"
#include "lidarcut/synth.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

using namespace lidarcut;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

SceneSpec small_spec(std::uint64_t seed) {
  SceneSpec s;
  s.seed = seed;
  s.n_objects = 5;
  s.ground_length = 40;
  s.trajectory_length = 24;
  return s;
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

// Writes a scene plus a config pointing at it.
PipelineConfig scene_on_disk(const SyntheticScene& scene, const fs::path& dir) {
  write_scene(scene, dir);
  PipelineConfig c;
  c.paths.scans_dir = (dir / "scans").string();
  c.paths.poses = (dir / "poses.txt").string();
  c.paths.point_features = (dir / "point_features.aifb").string();
  c.paths.cameras = (dir / "cameras.txt").string();
  c.paths.grids_dir = (dir / "grids").string();
  c.paths.gt = (dir / "gt.label").string();
  c.paths.output_dir = (dir / "run").string();
  c.workers = 1;
  return c;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(LIDARCUT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, JsonRoundTripAndDefaults) {
  PipelineConfig c;
  c.preset = Preset::SPI;
  c.theta_p = 0.7;
  c.eig_threshold = 0.01;
  c.ground.cell = 3.0;
  c.dbscan.min_pts = 7;
  c.paths.poses = "p.txt";
  const PipelineConfig back = PipelineConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  const PipelineConfig d = PipelineConfig::from_json(json::object());
  EXPECT_EQ(d.theta_s, 1.0);
  EXPECT_EQ(d.theta_p, 0.5);
  EXPECT_EQ(d.theta_i, 0.1);
  EXPECT_EQ(d.radius, 1.0);
  EXPECT_EQ(d.chunk_edge, 25.0);
  EXPECT_EQ(d.chunk_stride, 22.0);
  EXPECT_EQ(d.map_voxel, 0.05);
  EXPECT_EQ(d.ncut_voxel, 0.35);
  EXPECT_EQ(d.min_share, 0.01);
  EXPECT_EQ(d.merge_iou, 0.01);
  EXPECT_EQ(d.point_feature_radius, 0.35);
}

TEST(Config, PresetThresholds) {
  EXPECT_EQ(preset_eig_threshold(Preset::S), 0.075);
  EXPECT_EQ(preset_eig_threshold(Preset::SP), 0.03);
  EXPECT_EQ(preset_eig_threshold(Preset::SPI), 0.005);
  EXPECT_EQ(parse_preset("S+P+I"), Preset::SPI);
  EXPECT_EQ(to_string(Preset::SP), "S+P");
  EXPECT_THROW(parse_preset("SPI"), ConfigError);
  PipelineConfig c;
  c.preset = Preset::SP;
  EXPECT_EQ(c.effective_eig_threshold(), 0.03);
  c.eig_threshold = 0.2;
  EXPECT_EQ(c.effective_eig_threshold(), 0.2);
}

TEST(Config, UnknownKeysAndInvalidValuesRejected) {
  json j = PipelineConfig{}.to_json();
  j["bogus"] = 1;
  EXPECT_THROW(PipelineConfig::from_json(j), ConfigError);
  j = PipelineConfig{}.to_json();
  j["thetas"]["q"] = 1;
  EXPECT_THROW(PipelineConfig::from_json(j), ConfigError);
  j = PipelineConfig{}.to_json();
  j["radius"] = "one";
  EXPECT_THROW(PipelineConfig::from_json(j), ConfigError);
  for (const char* bad : {"radius=0", "chunk.stride=-1", "min_share=0.7", "method=\"kmeans\"", "preset=\"X\""}) {
    json k = json::object();
    apply_override(k, bad);
    EXPECT_THROW(PipelineConfig::from_json(k).validate(), ConfigError) << bad;
  }
}

TEST(Config, DottedOverrides) {
  json j = json::object();
  apply_override(j, "thetas.p=0.7");
  apply_override(j, "preset=S+P");
  apply_override(j, "paths.output_dir=/tmp/x");
  apply_override(j, "dbscan.min_pts=4");
  const PipelineConfig c = PipelineConfig::from_json(j);
  EXPECT_EQ(c.theta_p, 0.7);
  EXPECT_EQ(c.preset, Preset::SP);
  EXPECT_EQ(c.paths.output_dir, "/tmp/x");
  EXPECT_EQ(c.dbscan.min_pts, 4u);
  EXPECT_THROW(apply_override(j, "no_equals_sign"), ConfigError);
}

TEST(Inputs, MissingFeatureFileNamesPath) {
  const auto dir = testutil::temp_dir("pipe_missing");
  SceneSpec spec = small_spec(1);
  spec.cameras = false;
  PipelineConfig c = scene_on_disk(generate_scene(spec), dir);
  c.preset = Preset::SP;
  c.paths.point_features = (dir / "nope.aifb").string();
  try {
    load_inputs(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("nope.aifb"), std::string::npos) << e.what();
  }
  c.preset = Preset::S;
  EXPECT_NO_THROW(load_inputs(c));
}

TEST(Pipeline, GeometricSceneIsPerfectWithPresetS) {
  const SyntheticScene scene = generate_scene(small_spec(2));
  PipelineConfig c;
  c.workers = 1;
  const RunResult r = run_pipeline(c, inputs_from_scene(scene));
  ASSERT_TRUE(r.report);
  EXPECT_EQ(r.report->f1, 1.0);
  EXPECT_EQ(r.report->ap50, 1.0);
  EXPECT_GE(r.report->s_assoc, 0.99);
  EXPECT_EQ(r.segmentation.labels.size(), r.map.cloud.size());
  EXPECT_EQ(r.chunks.size(), 2u);
}

TEST(Pipeline, DiskAndMemoryInputsAgree) {
  const SyntheticScene scene = generate_scene(small_spec(3));
  const auto dir = testutil::temp_dir("pipe_disk");
  const PipelineConfig c = scene_on_disk(scene, dir);
  const RunResult mem = run_pipeline(c, inputs_from_scene(scene));
  const RunResult disk = run_pipeline(c, load_inputs(c));
  EXPECT_EQ(disk.map.cloud.points, mem.map.cloud.points);
  EXPECT_EQ(disk.segmentation.labels, mem.segmentation.labels);
}

TEST(Pipeline, DeterministicAcrossRunsAndWorkers) {
  const auto dir = testutil::temp_dir("pipe_det");
  PipelineConfig c = scene_on_disk(generate_scene(small_spec(4)), dir);
  c.preset = Preset::SPI;
  c.paths.output_dir = (dir / "a").string();
  run(c);
  c.paths.output_dir = (dir / "b").string();
  run(c);
  c.workers = 3;
  c.paths.output_dir = (dir / "c").string();
  run(c);
  const auto a = read_bytes(dir / "a" / "instances.label");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(read_bytes(dir / "b" / "instances.label"), a);
  EXPECT_EQ(read_bytes(dir / "c" / "instances.label"), a);
  EXPECT_EQ(read_json(dir / "a" / "report.json"), read_json(dir / "c" / "report.json"));
}

TEST(Pipeline, OutputsAndManifest) {
  const auto dir = testutil::temp_dir("pipe_out");
  const PipelineConfig c = scene_on_disk(generate_scene(small_spec(5)), dir);
  const RunResult r = run(c);
  const fs::path out = c.paths.output_dir;
  for (const char* f : {"instances.label", "map.aict", "confidence.json", "report.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_EQ(load_instance_labels(out / "instances.label"), r.segmentation.labels);
  const json m = read_json(out / "manifest.json");
  EXPECT_EQ(m["config"], c.to_json());
  EXPECT_EQ(m["seed"], c.seed);
  EXPECT_EQ(m["effective"]["eig_threshold"], 0.075);
  EXPECT_EQ(m["map_points"], r.map.cloud.size());
  EXPECT_TRUE(m.contains("version"));
  EXPECT_TRUE(m.contains("eigen_version"));
  EXPECT_EQ(read_json(out / "confidence.json").size(), r.segmentation.count);
  const Intermediates inter = load_intermediates(out / "map.aict");
  ASSERT_TRUE(inter.map_points);
  EXPECT_EQ(*inter.map_points, r.map.cloud.points);
}

TEST(Pipeline, FailedWriteRemovesPartialOutputs) {
  const auto dir = testutil::temp_dir("pipe_partial");
  PipelineConfig c = scene_on_disk(generate_scene(small_spec(6)), dir);
  // A non-empty directory where report.json should go makes that write fail.
  fs::create_directories(fs::path(c.paths.output_dir) / "report.json" / "keep");
  EXPECT_THROW(run(c), DataError);
  EXPECT_FALSE(fs::exists(fs::path(c.paths.output_dir) / "instances.label"));
  EXPECT_FALSE(fs::exists(fs::path(c.paths.output_dir) / "map.aict"));
  EXPECT_FALSE(fs::exists(fs::path(c.paths.output_dir) / "confidence.json"));
  EXPECT_TRUE(fs::exists(fs::path(c.paths.output_dir) / "report.json" / "keep"));
}

TEST(Pipeline, GtLengthMismatchIsDataError) {
  const SyntheticScene scene = generate_scene(small_spec(7));
  PipelineInputs in = inputs_from_scene(scene);
  in.gt.pop_back();
  PipelineConfig c;
  c.workers = 1;
  EXPECT_THROW(run_pipeline(c, in), DataError);
}

TEST(Ablate, SingleValueEqualsPlainRun) {
  const SyntheticScene scene = generate_scene(small_spec(8));
  const PipelineInputs in = inputs_from_scene(scene);
  PipelineConfig c;
  c.workers = 1;
  const auto rows = ablate(c, in, "theta_s", {1.0});
  ASSERT_EQ(rows.size(), 1u);
  const RunResult plain = run_pipeline(c, in);
  EXPECT_EQ(rows[0].report.to_json(), plain.report->to_json());
  const std::string table = ablation_table("theta_s", rows);
  EXPECT_EQ(table.substr(0, table.find('\n')), "theta_s\tP\tR\tF1\tAP25\tAP50\tAP\tS_assoc\twall_s");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 2);
}

TEST(Ablate, UnknownParameterListsValidNames) {
  const SyntheticScene scene = generate_scene(small_spec(9));
  try {
    ablate(PipelineConfig{}, inputs_from_scene(scene), "gamma", {1.0});
    FAIL();
  } catch (const ConfigError& e) {
    for (const auto& name : ablation_parameters()) EXPECT_NE(std::string(e.what()).find(name), std::string::npos);
  }
  PipelineInputs no_gt = inputs_from_scene(scene);
  no_gt.gt.clear();
  EXPECT_THROW(ablate(PipelineConfig{}, no_gt, "R", {1.0}), ConfigError);
}

TEST(Ablate, CoarserNcutVoxelIsFaster) {
  SceneSpec spec = small_spec(10);
  spec.n_objects = 8;
  const PipelineInputs in = inputs_from_scene(generate_scene(spec));
  PipelineConfig c;
  c.workers = 1;
  const auto rows = ablate(c, in, "ncut_voxel", {0.2, 0.35, 0.5});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_GT(rows[0].seconds, rows[1].seconds);
  EXPECT_GT(rows[1].seconds, rows[2].seconds);
}

TEST(Container, RoundTripAndErrors) {
  const auto dir = testutil::temp_dir("aict");
  const SyntheticScene scene = generate_scene(small_spec(11));
  PipelineConfig c;
  c.workers = 1;
  const GraphDump d = build_graphs(c, inputs_from_scene(scene));
  Intermediates inter{d.map_points, d.chunks, d.graphs};
  write_intermediates(dir / "g.aict", inter);
  const Intermediates back = load_intermediates(dir / "g.aict");
  ASSERT_TRUE(back.map_points);
  EXPECT_EQ(*back.map_points, d.map_points);
  ASSERT_EQ(back.chunks.size(), d.chunks.size());
  ASSERT_EQ(back.graphs.size(), d.graphs.size());
  for (std::size_t i = 0; i < d.chunks.size(); ++i) {
    EXPECT_EQ(back.chunks[i].raw_indices, d.chunks[i].raw_indices);
    EXPECT_EQ(back.chunks[i].ds_points, d.chunks[i].ds_points);
    EXPECT_EQ(back.chunks[i].ds_to_raw, d.chunks[i].ds_to_raw);
    EXPECT_EQ(back.chunks[i].center, d.chunks[i].center);
    EXPECT_EQ(back.graphs[i].neighbors, d.graphs[i].neighbors);
    EXPECT_EQ(back.graphs[i].weights, d.graphs[i].weights);
    EXPECT_EQ(back.graphs[i].node_to_point, d.graphs[i].node_to_point);
  }
  write_intermediates(dir / "h.aict", back);
  EXPECT_EQ(read_bytes(dir / "h.aict"), read_bytes(dir / "g.aict"));
  auto bytes = read_bytes(dir / "g.aict");
  bytes.resize(bytes.size() - 3);
  {
    std::ofstream out(dir / "t.aict", std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  EXPECT_THROW(load_intermediates(dir / "t.aict"), DataError);
  { std::ofstream(dir / "m.aict") << "NOPE"; }
  EXPECT_THROW(load_intermediates(dir / "m.aict"), DataError);
}

TEST(Cli, EndToEndAndExitCodes) {
  const auto dir = testutil::temp_dir("cli");
  const std::string d = dir.string();
  ASSERT_EQ(cli("synth --out " + d + "/scene --set n_objects=4 --set ground_length=40 --set trajectory_length=24"), 0);
  ASSERT_TRUE(fs::exists(dir / "scene" / "config.json"));
  ASSERT_EQ(cli("run --config " + d + "/scene/config.json --workers 1"), 0);
  const fs::path run = dir / "scene" / "run";
  ASSERT_TRUE(fs::exists(run / "instances.label"));
  EXPECT_EQ(read_json(run / "report.json")["f1"], 1.0);
  EXPECT_EQ(cli("eval --pred " + (run / "instances.label").string() + " --gt " + d + "/scene/gt.label --out " + d +
                "/eval.json"),
            0);
  EXPECT_EQ(read_json(dir / "eval.json")["f1"], 1.0);
  EXPECT_EQ(cli("export-ply --map " + (run / "map.aict").string() + " --labels " + (run / "instances.label").string() +
                " --out " + d + "/map.ply"),
            0);
  EXPECT_EQ(load_ply(dir / "map.ply").size(), load_instance_labels(run / "instances.label").size());
  EXPECT_EQ(cli("dump-graph --config " + d + "/scene/config.json --out " + d + "/graphs"), 0);
  EXPECT_TRUE(fs::exists(dir / "graphs" / "chunk_000.edges"));
  EXPECT_EQ(cli("cut-graph --config " + d + "/scene/config.json --graphs " + d + "/graphs/graphs.aict --index 0 --out " +
                d + "/cut.txt"),
            0);
  EXPECT_EQ(cli("ablate --config " + d + "/scene/config.json --param R --values 1.0,1.2 --out " + d + "/abl.tsv"), 0);

  EXPECT_EQ(cli("run --config " + d + "/scene/config.json --set bogus=1"), 2);
  EXPECT_EQ(cli("run --config " + d + "/missing.json"), 2);
  EXPECT_EQ(cli("run --config " + d + "/scene/config.json --set preset=S+P --set paths.point_features=" + d + "/x.aifb"),
            2);
  EXPECT_EQ(cli("ablate --config " + d + "/scene/config.json --param nope --values 1"), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  { std::ofstream(dir / "bad.label") << "abc"; }
  EXPECT_EQ(cli("eval --pred " + d + "/bad.label --gt " + d + "/scene/gt.label"), 3);
  EXPECT_EQ(cli("run --config " + d + "/scene/config.json --set solver.max_iter=1 --set preset=S"), 0);
}

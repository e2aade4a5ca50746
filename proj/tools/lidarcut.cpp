// lidarcut command line: synth, run, eval, ablate, export-ply, dump-graph, cut-graph.

#include "lidarcut/container.hpp"
#include "lidarcut/errors.hpp"
#include "lidarcut/eval.hpp"
#include "lidarcut/io.hpp"
#include "lidarcut/ncut.hpp"
#include "lidarcut/pipeline.hpp"
#include "lidarcut/synth.hpp"
#include "lidarcut/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lidarcut;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumerical = 4 };

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("lidarcut");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("LIDARCUT_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off")
      spdlog::warn("LIDARCUT_LOG='{}' is not a log level, keeping info", env);
    else
      spdlog::set_level(level);
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

PipelineConfig build_config(const std::string& path, const std::vector<std::string>& sets) {
  json j = path.empty() ? json::object() : read_json_file(path);
  for (const auto& s : sets) apply_override(j, s);
  return PipelineConfig::from_json(j);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw DataError("write failure on " + path);
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not a number in value list: '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Label-free LiDAR instance segmentation with normalized cuts"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, out, spec_path, pred_path, gt_path, conf_path, map_path, labels_path, param, values,
      graphs_path;
  std::vector<std::string> sets;
  int workers = -1;
  std::size_t graph_index = 0;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene with ground truth");
  synth->add_option("--spec", spec_path, "Scene spec JSON");
  synth->add_option("--set", sets, "Override a spec field (key=value)");
  synth->add_option("--out", out, "Output directory")->required();

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Pipeline config JSON");
    cmd->add_option("--set", sets, "Override a config key (dotted.key=value)");
    cmd->add_option("--workers", workers, "Worker threads (0 = all cores)");
  };
  auto* run_cmd = app.add_subcommand("run", "Segment a map and write labels, report and manifest");
  add_config(run_cmd);
  run_cmd->add_option("--out", out, "Output directory (overrides paths.output_dir)");

  auto* eval = app.add_subcommand("eval", "Score a label file against ground truth");
  eval->add_option("--pred", pred_path, "Predicted label file")->required();
  eval->add_option("--gt", gt_path, "Ground-truth label file")->required();
  eval->add_option("--confidence", conf_path, "JSON array of per-instance confidences");
  eval->add_option("--out", out, "Report path (default stdout)");

  auto* ablate_cmd = app.add_subcommand("ablate", "Sweep one parameter and tabulate metrics");
  add_config(ablate_cmd);
  ablate_cmd->add_option("--param", param, "Parameter name")->required();
  ablate_cmd->add_option("--values", values, "Comma-separated values")->required();
  ablate_cmd->add_option("--out", out, "TSV path (default stdout)");

  auto* ply = app.add_subcommand("export-ply", "Write a colored PLY of a segmented map");
  ply->add_option("--map", map_path, "map.aict from a run")->required();
  ply->add_option("--labels", labels_path, "Instance label file")->required();
  ply->add_option("--out", out, "PLY path")->required();

  auto* dump = app.add_subcommand("dump-graph", "Persist per-chunk proxy graphs");
  add_config(dump);
  dump->add_option("--out", out, "Output directory")->required();

  auto* cut = app.add_subcommand("cut-graph", "Run recursive normalized cuts on a persisted graph");
  cut->add_option("--graphs", graphs_path, "graphs.aict from dump-graph")->required();
  cut->add_option("--index", graph_index, "Graph index");
  add_config(cut);
  cut->add_option("--out", out, "Node label text (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    auto config = [&] {
      PipelineConfig c = build_config(config_path, sets);
      if (workers >= 0) c.workers = static_cast<unsigned>(workers);
      return c;
    };

    if (*synth) {
      json j = spec_path.empty() ? json::object() : read_json_file(spec_path);
      for (const auto& s : sets) apply_override(j, s);
      const SceneSpec spec = SceneSpec::from_json(j);
      const SyntheticScene scene = generate_scene(spec);
      write_scene(scene, out);
      PipelineConfig c;
      const fs::path dir = fs::absolute(out);
      c.paths.scans_dir = (dir / "scans").string();
      c.paths.poses = (dir / "poses.txt").string();
      c.paths.point_features = (dir / "point_features.aifb").string();
      if (!scene.cameras.empty()) {
        c.paths.cameras = (dir / "cameras.txt").string();
        c.paths.grids_dir = (dir / "grids").string();
      }
      c.paths.gt = (dir / "gt.label").string();
      c.paths.output_dir = (dir / "run").string();
      c.map_voxel = spec.map_voxel;
      c.seed = spec.seed;
      write_text((dir / "config.json").string(), c.to_json().dump(2) + "\n");
      spdlog::info("wrote {} objects, {} map points to {}", scene.objects.size(), scene.map.cloud.size(), out);
    } else if (*run_cmd) {
      PipelineConfig c = config();
      if (!out.empty()) c.paths.output_dir = out;
      const RunResult r = run(c);
      if (r.report) std::cout << r.report->to_json().dump(2) << '\n';
    } else if (*eval) {
      const auto pred = load_instance_labels(pred_path);
      const auto gt = load_instance_labels(gt_path);
      std::vector<double> conf;
      if (!conf_path.empty()) {
        try {
          conf = read_json_file(conf_path).get<std::vector<double>>();
        } catch (const json::exception& e) {
          throw ConfigError(conf_path + ": " + e.what());
        }
      }
      if (pred.size() != gt.size())
        throw DataError(pred_path + " has " + std::to_string(pred.size()) + " labels, " + gt_path + " has " +
                        std::to_string(gt.size()));
      write_text(out, evaluate(pred, gt, conf).to_json().dump(2) + "\n");
    } else if (*ablate_cmd) {
      const PipelineConfig c = config();
      const auto inputs = load_inputs(c);
      const auto rows = ablate(c, inputs, param, parse_values(values));
      write_text(out, ablation_table(param, rows));
    } else if (*ply) {
      const Intermediates inter = load_intermediates(map_path);
      if (!inter.map_points) throw DataError(map_path + " holds no map record");
      const auto labels = load_instance_labels(labels_path);
      if (labels.size() != inter.map_points->size())
        throw DataError(labels_path + " has " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(inter.map_points->size()) + " map points");
      export_ply(out, *inter.map_points, labels);
    } else if (*dump) {
      const PipelineConfig c = config();
      const GraphDump d = build_graphs(c, load_inputs(c));
      fs::create_directories(out);
      Intermediates inter;
      inter.map_points = d.map_points;
      inter.chunks = d.chunks;
      inter.graphs = d.graphs;
      write_intermediates(fs::path(out) / "graphs.aict", inter);
      for (std::size_t i = 0; i < d.graphs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "chunk_%03zu.edges", i);
        std::ofstream f(fs::path(out) / name, std::ios::trunc);
        write_edge_list(f, d.graphs[i]);
        if (!f) throw DataError("write failure on " + (fs::path(out) / name).string());
      }
      spdlog::info("wrote {} chunk graphs to {}", d.graphs.size(), out);
    } else if (*cut) {
      const PipelineConfig c = config();
      const Intermediates inter = load_intermediates(graphs_path);
      if (graph_index >= inter.graphs.size())
        throw ConfigError("graph index " + std::to_string(graph_index) + " out of range (" +
                          std::to_string(inter.graphs.size()) + " graphs)");
      NcutParams np;
      np.eig_threshold = c.effective_eig_threshold();
      np.min_share = c.min_share;
      np.min_points = c.min_points;
      np.sweep_points = c.sweep_points;
      np.solver = {c.solver_tol, c.solver_max_iter, c.seed};
      const InstanceLabeling l = recursive_ncut(inter.graphs[graph_index], np);
      std::ostringstream text;
      for (auto v : l.labels) text << v << '\n';
      write_text(out, text.str());
    }
  } catch (const ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return kConfig;
  } catch (const NumericalError& e) {
    spdlog::error("numerical failure: {}", e.what());
    return kNumerical;
  } catch (const DataError& e) {
    spdlog::error("data error: {}", e.what());
    return kData;
  } catch (const std::invalid_argument& e) {
    spdlog::error("data error: {}", e.what());
    return kData;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kOk;
}

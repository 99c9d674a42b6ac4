// Batch front-end for the electromagnetic hydrodynamic-trajectory simulator.
//
//   emhydro evolve      --config run.cfg --times 0,0.25,0.5 [--out DIR]
//   emhydro trace       --config run.cfg [--out DIR]
//   emhydro reconstruct --config run.cfg --times 0.25 [--out DIR] [--workers N]
//   emhydro verify      --config run.cfg [--snapshot FILE ...]
//   emhydro compare A.emh1 B.emh1
//   emhydro demo-planewave [--out DIR] [--workers N]
//
// exit codes: 0 ok, 2 invalid config or file, 3 constraint violation,
// 4 trajectory failure

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "emhydro/pipeline.hpp"

namespace {

std::vector<double> parse_times(const std::string& list) {
  std::vector<double> out;
  std::istringstream is(list);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    if (tok.empty()) continue;
    size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw emhydro::ConfigError("bad --times entry: " + tok);
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"electromagnetic field from hydrodynamic trajectories"};
  app.require_subcommand(1);

  std::string config_path, out_dir, times_list;
  std::vector<std::string> snapshot_paths;
  std::string compare_a, compare_b;
  int workers = 1;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      sub->add_option("--config", config_path, "run configuration file")->required();
    }
    sub->add_option("--out", out_dir, "output directory (default: config output.dir)");
    sub->add_option("--workers", workers, "worker threads for ensemble work");
  };

  CLI::App* evolve = app.add_subcommand("evolve", "spectral field evolution snapshots");
  add_common(evolve, true);
  evolve->add_option("--times", times_list, "comma-separated snapshot times");

  CLI::App* trace = app.add_subcommand("trace", "integrate the trajectory ensemble");
  add_common(trace, true);

  CLI::App* rec = app.add_subcommand("reconstruct",
                                     "recover the field from trajectories");
  add_common(rec, true);
  rec->add_option("--times", times_list, "comma-separated reconstruction times");

  CLI::App* verify = app.add_subcommand("verify", "run the invariant suite");
  add_common(verify, true);
  verify->add_option("--snapshot", snapshot_paths, "snapshot files to validate");

  CLI::App* cmp = app.add_subcommand("compare", "compare two field snapshots");
  cmp->add_option("a", compare_a, "first snapshot")->required();
  cmp->add_option("b", compare_b, "second snapshot")->required();

  CLI::App* demo = app.add_subcommand("demo-planewave",
                                      "end-to-end plane-wave pipeline");
  add_common(demo, false);

  CLI11_PARSE(app, argc, argv);

  try {
    emhydro::cfg::RunConfig cfg;
    if (!config_path.empty()) cfg = emhydro::cfg::load_config(config_path);
    const std::string dir = !out_dir.empty() ? out_dir : cfg.output_dir;
    const std::vector<double> times = parse_times(times_list);

    if (evolve->parsed()) {
      return emhydro::pipeline::cmd_evolve(cfg, dir, times, std::cout);
    }
    if (trace->parsed()) {
      return emhydro::pipeline::cmd_trace(cfg, dir, std::cout);
    }
    if (rec->parsed()) {
      return emhydro::pipeline::cmd_reconstruct(cfg, dir, times, workers, std::cout);
    }
    if (verify->parsed()) {
      return emhydro::pipeline::cmd_verify(cfg, snapshot_paths, std::cout);
    }
    if (cmp->parsed()) {
      return emhydro::pipeline::cmd_compare(compare_a, compare_b, std::cout);
    }
    if (demo->parsed()) {
      const std::string demo_dir = out_dir.empty() ? "demo_out" : out_dir;
      return emhydro::pipeline::cmd_demo(demo_dir, workers, std::cout);
    }
  } catch (const emhydro::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const emhydro::SnapshotError& e) {
    std::cerr << "snapshot error: " << e.what() << "\n";
    return 2;
  } catch (const emhydro::ConstraintViolation& e) {
    std::cerr << "constraint violation: " << e.what() << "\n";
    return 3;
  } catch (const emhydro::NodeTooClose& e) {
    std::cerr << "trajectory failure: " << e.what() << "\n";
    return 4;
  } catch (const emhydro::PoleSingularity& e) {
    std::cerr << "trajectory failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

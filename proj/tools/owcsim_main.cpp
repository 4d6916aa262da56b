// Command-line front end: owcsim {channel,associate,montecarlo,sweep,scene}.

#include <CLI11.hpp>

#include <iostream>

#include "owcsim/report.hpp"
#include "owcsim/scene_io.hpp"

namespace {

void add_common(CLI::App* cmd, owc::RunConfig& c, std::string& pos, std::string& grid) {
  cmd->add_option("--scene", c.scene, "Preset name (room-a, room-b) or scene file path")
      ->capture_default_str();
  cmd->add_option("--pos", pos, "Receiver position x,y on the communication floor");
  cmd->add_option("--grid", grid, "Sweep grid x1,x2,...:ystep");
  cmd->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--elem1", c.elem1, "First-order element size, m")->capture_default_str();
  cmd->add_option("--elem2", c.elem2, "Second-order element size, m")->capture_default_str();
  cmd->add_flag("--full-resolution,--paper-resolution", c.full_resolution,
                "Use 0.05 m / 0.20 m elements above the communication floor");
  cmd->add_option("--threshold-db", c.threshold_db, "CNR/I association threshold, dB")
      ->capture_default_str();
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indoor visible-light channel and link simulator"};
  app.require_subcommand(1);

  owc::RunConfig config;
  std::string pos;
  std::string grid;

  auto* channel = app.add_subcommand("channel", "Trace arrivals, delay spread and 3-dB bandwidth");
  auto* associate = app.add_subcommand("associate", "H matrix, CNR/I and unit association");
  auto* montecarlo = app.add_subcommand("montecarlo", "Tone statistics and threshold study");
  auto* sweep = app.add_subcommand("sweep", "Link reports over a grid of receiver positions");
  for (auto* cmd : {channel, associate, montecarlo, sweep}) add_common(cmd, config, pos, grid);
  montecarlo->add_option("--samples", config.samples, "Number of random receiver positions")
      ->capture_default_str();
  montecarlo->add_option("--desired", config.desired_unit, "Desired unit id")->capture_default_str();
  montecarlo->add_option("--interferer", config.interfering_unit, "Interfering unit id")
      ->capture_default_str();

  auto* scene_cmd = app.add_subcommand("scene", "Print a scene in the text scene format");
  std::string scene_source = "room-a";
  scene_cmd->add_option("--scene", scene_source, "Preset name or scene file path")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!pos.empty()) config.pos = owc::parse_xy(pos);
    if (!grid.empty()) config.grid = owc::parse_grid(grid);
    if (*channel) owc::cmd_channel(config, std::cerr);
    if (*associate) owc::cmd_associate(config, std::cerr);
    if (*montecarlo) owc::cmd_montecarlo(config, std::cerr);
    if (*sweep) owc::cmd_sweep(config, std::cerr);
    if (*scene_cmd) std::cout << owc::serialize_scene_document(owc::resolve_scene(scene_source));
  } catch (const owc::SceneError& e) {
    std::cerr << "owcsim: scene error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "owcsim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

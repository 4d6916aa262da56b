#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "owcsim/link.hpp"
#include "owcsim/raytracer.hpp"
#include "owcsim/scene_io.hpp"
#include "owcsim/scm.hpp"

namespace owc {

// Scientific notation with 9 significant digits; "inf", "-inf", "nan" for
// non-finite values.
std::string format_sci(double v);

struct GridSpec {
  std::vector<double> xs;
  double y_step = 0.5;
};

// "x1,x2,...:ystep" (the ":ystep" part is optional).
GridSpec parse_grid(const std::string& text);
// "x,y"
std::pair<double, double> parse_xy(const std::string& text);

// Receiver positions of a sweep: for each x in the grid, y = step, 2 step, ...
// up to length - step (1 .. 7 m for the default 0.5 m step in an 8 m room).
std::vector<Point3> sweep_positions(const Scene& scene, const GridSpec& grid);

struct RunConfig {
  std::string scene = "room-a";
  double elem1 = 0.25;
  double elem2 = 0.5;
  bool full_resolution = false;
  std::optional<std::pair<double, double>> pos;
  std::optional<GridSpec> grid;
  uint64_t seed = 1;
  std::string out = "out";
  double threshold_db = kAssociationThresholdDb;
  int samples = 1000;  // Monte-Carlo positions
  int desired_unit = 1;
  int interfering_unit = 2;

  void validate() const;
  TraceOptions trace_options() const;
};

// Subcommands. Each writes its CSV files into config.out (created if
// missing). On failure every file written so far is removed, the directory
// too if the command created it, and the exception propagates.
void cmd_channel(const RunConfig& config, std::ostream& log);
void cmd_associate(const RunConfig& config, std::ostream& log);
void cmd_montecarlo(const RunConfig& config, std::ostream& log);
void cmd_sweep(const RunConfig& config, std::ostream& log);

// Pieces the commands are built from, exposed for tests and bindings.
ImagingReceiver receiver_at(const SceneDocument& doc, const Point3& position);
Point3 position_on_floor(const Scene& scene, double x, double y);

std::string arrivals_csv(const ChannelMatrix& channel);
std::string delay_spread_csv(const ChannelMatrix& channel);
std::string bandwidth_csv(const ChannelMatrix& channel);
std::string h_matrix_csv(const HMatrix& h);
std::string cnr_csv(const HMatrix& h, const std::vector<double>& cnr_db);
std::string association_csv(const AssociationResult& assoc);
std::string link_report_csv(const std::vector<LinkReport>& reports);
std::string heatmap_csv(const std::vector<LinkReport>& reports);

// Channel used for the per-unit delay-spread and bandwidth tables: the
// arrivals at the pixels that receive the unit's LOS, or at every pixel when
// the unit has no LOS path to the receiver.
std::vector<Arrival> unit_channel(const ChannelMatrix& channel, int unit_index);

// Monte-Carlo threshold study (the data behind cmd_montecarlo).
struct ProbabilityRow {
  std::string label;
  GaussianFit ds;
  GaussianFit us;
  double sigma_t = 0.0;
  double threshold = 0.0;
  DecisionProbabilities p;
};

struct MonteCarloResult {
  ToneSamples samples;
  ToneFits fits;
  NoiseBudget noise;
  std::vector<ProbabilityRow> rows;  // "fitted" then "narrow_spread"
  std::vector<std::pair<double, double>> threshold_sweep;  // (sigma_ds, opt_th)
  bool low_sample = false;
};

inline constexpr int kLowSampleCount = 100;
// Spread used for both tones in the narrow-spread row, A.
inline constexpr double kNarrowSpreadSigma = 1e-10;

MonteCarloResult run_montecarlo(const Tracer& tracer, const ImagingReceiver& rx, int samples,
                                uint64_t seed, int desired_unit, int interfering_unit);

std::string probability_csv(const MonteCarloResult& mc);
std::string samples_csv(const ToneSamples& samples);
std::string histogram_csv(const std::vector<double>& values, int bins);
std::string threshold_sweep_csv(const MonteCarloResult& mc);

}  // namespace owc

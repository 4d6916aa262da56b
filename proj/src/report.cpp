#include "owcsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "owcsim/parallel.hpp"

namespace owc {

namespace fs = std::filesystem;

std::string format_sci(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

namespace {

double parse_double(const std::string& s, const std::string& what) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("bad number '" + s + "' in " + what);
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  const auto colon = text.find(':');
  const std::string xs = text.substr(0, colon);
  for (const auto& part : split(xs, ',')) g.xs.push_back(parse_double(part, "--grid"));
  if (g.xs.empty()) throw std::invalid_argument("--grid needs at least one x value");
  if (colon != std::string::npos) g.y_step = parse_double(text.substr(colon + 1), "--grid");
  if (!(g.y_step > 0.0)) throw std::invalid_argument("--grid y step must be positive");
  return g;
}

std::pair<double, double> parse_xy(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw std::invalid_argument("--pos expects x,y");
  return {parse_double(parts[0], "--pos"), parse_double(parts[1], "--pos")};
}

std::vector<Point3> sweep_positions(const Scene& scene, const GridSpec& grid) {
  std::vector<Point3> out;
  const double y0 = 1.0;
  const double y1 = scene.room.length - 1.0;
  const long n = static_cast<long>(std::floor((y1 - y0) / grid.y_step + 1e-9));
  for (double x : grid.xs) {
    if (n < 0) {
      out.push_back(position_on_floor(scene, x, 0.5 * scene.room.length));
      continue;
    }
    for (long k = 0; k <= n; ++k) out.push_back(position_on_floor(scene, x, y0 + k * grid.y_step));
  }
  return out;
}

void RunConfig::validate() const {
  if (!(elem1 > 0.0) || !(elem2 > 0.0)) throw std::invalid_argument("element sizes must be positive");
  if (!(threshold_db == threshold_db)) throw std::invalid_argument("threshold must be a number");
  if (samples < 1) throw std::invalid_argument("need at least one Monte-Carlo sample");
  if (out.empty()) throw std::invalid_argument("--out must not be empty");
}

TraceOptions RunConfig::trace_options() const {
  if (full_resolution) return TraceOptions::full_resolution();
  TraceOptions o;
  o.element_size_1st = elem1;
  o.element_size_2nd = elem2;
  return o;
}

Point3 position_on_floor(const Scene& scene, double x, double y) {
  const Point3 p{x, y, scene.comm_floor_z};
  if (!(x >= 0.0 && x <= scene.room.width && y >= 0.0 && y <= scene.room.length)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "receiver position (%g, %g) is outside the %g x %g m room", x,
                  y, scene.room.width, scene.room.length);
    throw std::invalid_argument(buf);
  }
  return p;
}

ImagingReceiver receiver_at(const SceneDocument& doc, const Point3& position) {
  ImagingReceiver rx = doc.has_receiver ? doc.receiver : ImagingReceiver{};
  rx.position = position;
  return rx;
}

std::vector<Arrival> unit_channel(const ChannelMatrix& channel, int unit_index) {
  std::vector<int> pixels = channel.los_pixels(unit_index);
  if (pixels.empty()) {
    pixels.resize(static_cast<size_t>(channel.pixels));
    for (int p = 0; p < channel.pixels; ++p) pixels[static_cast<size_t>(p)] = p;
  }
  return channel.gather(unit_index, pixels);
}

std::string arrivals_csv(const ChannelMatrix& channel) {
  std::string out = "unit,pixel,delay_s,power_w,bounce_order\n";
  for (int u = 0; u < channel.units(); ++u) {
    for (int p = 0; p < channel.pixels; ++p) {
      for (const auto& a : channel.at(u, p)) {
        out += std::to_string(a.unit) + "," + std::to_string(p) + "," + format_sci(a.delay_s) +
               "," + format_sci(a.power_w) + "," + std::to_string(a.order) + "\n";
      }
    }
  }
  return out;
}

std::string delay_spread_csv(const ChannelMatrix& channel) {
  std::string out = "unit,los_pixels,total_power_w,mean_delay_s,delay_spread_s\n";
  for (int u = 0; u < channel.units(); ++u) {
    const auto arrivals = unit_channel(channel, u);
    const double p = total_power(arrivals);
    const double nan = std::nan("");
    out += std::to_string(channel.unit_ids[static_cast<size_t>(u)]) + "," +
           std::to_string(channel.los_pixels(u).size()) + "," + format_sci(p) + "," +
           format_sci(p > 0 ? mean_delay(arrivals) : nan) + "," +
           format_sci(p > 0 ? delay_spread(arrivals) : nan) + "\n";
  }
  return out;
}

std::string bandwidth_csv(const ChannelMatrix& channel) {
  std::string out = "unit,bandwidth_3db_hz\n";
  for (int u = 0; u < channel.units(); ++u) {
    const auto arrivals = unit_channel(channel, u);
    const double bw = total_power(arrivals) > 0 ? bandwidth_3db(arrivals) : std::nan("");
    out += std::to_string(channel.unit_ids[static_cast<size_t>(u)]) + "," + format_sci(bw) + "\n";
  }
  return out;
}

namespace {

std::string unit_header(const std::vector<int>& ids) {
  std::string out = "pixel,row,col";
  for (int id : ids) out += ",unit_" + std::to_string(id);
  return out + "\n";
}

std::string pixel_table(const HMatrix& h, const std::vector<double>& values) {
  constexpr int kCols = PixelGrid{}.cols;
  std::string out = unit_header(h.unit_ids);
  const int m = h.units();
  for (int n = 0; n < h.pixels; ++n) {
    out += std::to_string(n) + "," + std::to_string(n / kCols) + "," + std::to_string(n % kCols);
    for (int u = 0; u < m; ++u) out += "," + format_sci(values[static_cast<size_t>(n) * m + u]);
    out += "\n";
  }
  return out;
}

}  // namespace

std::string h_matrix_csv(const HMatrix& h) { return pixel_table(h, h.pr); }

std::string cnr_csv(const HMatrix& h, const std::vector<double>& cnr_db) {
  return pixel_table(h, cnr_db);
}

std::string association_csv(const AssociationResult& assoc) {
  std::string out = "unit,active,serving_pixels,best_cnr_i_db\n";
  const size_t m = assoc.unit_ids.size();
  for (size_t u = 0; u < m; ++u) {
    double best = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < assoc.pixels; ++n) best = std::max(best, assoc.cnr_db[n * m + u]);
    std::string pixels;
    for (int p : assoc.serving[u]) pixels += (pixels.empty() ? "" : " ") + std::to_string(p);
    out += std::to_string(assoc.unit_ids[u]) + "," + (assoc.active[u] ? "1" : "0") + "," +
           pixels + "," + format_sci(best) + "\n";
  }
  return out;
}

std::string link_report_csv(const std::vector<LinkReport>& reports) {
  std::string out = "position_x,position_y,unit,active,rate_bps,sinr_db,aggregate_bps\n";
  for (const auto& r : reports) {
    const std::string pos = format_sci(r.position.x) + "," + format_sci(r.position.y) + ",";
    for (const auto& u : r.units) {
      out += pos + std::to_string(u.unit) + "," + (u.active ? "1" : "0") + "," +
             format_sci(u.rate_bps) + "," + format_sci(u.sinr_db) + "," +
             format_sci(r.aggregate_bps) + "\n";
    }
    int active = 0;
    for (const auto& u : r.units) active += u.active ? 1 : 0;
    out += pos + "all," + std::to_string(active) + "," + format_sci(r.aggregate_bps) + ",nan," +
           format_sci(r.aggregate_bps) + "\n";
  }
  return out;
}

std::string heatmap_csv(const std::vector<LinkReport>& reports) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : reports) {
    if (std::find(xs.begin(), xs.end(), r.position.x) == xs.end()) xs.push_back(r.position.x);
    if (std::find(ys.begin(), ys.end(), r.position.y) == ys.end()) ys.push_back(r.position.y);
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  std::string out = "y";
  for (double x : xs) out += ",x=" + format_sci(x);
  out += "\n";
  for (double y : ys) {
    out += format_sci(y);
    for (double x : xs) {
      double v = std::nan("");
      for (const auto& r : reports) {
        if (r.position.x == x && r.position.y == y) v = r.aggregate_bps;
      }
      out += "," + format_sci(v);
    }
    out += "\n";
  }
  return out;
}

MonteCarloResult run_montecarlo(const Tracer& tracer, const ImagingReceiver& rx, int samples,
                                uint64_t seed, int desired_unit, int interfering_unit) {
  MonteCarloResult mc;
  const Scene& scene = tracer.scene();
  const auto positions = random_floor_positions(scene, static_cast<size_t>(samples), seed);
  mc.samples = sample_tone_currents(tracer, rx, positions, desired_unit, interfering_unit);
  mc.fits = fit_tone_distributions(mc.samples);
  mc.low_sample = samples < kLowSampleCount;

  double mean_power = 0.0;
  for (double p : mc.samples.pixel_power) mean_power += p;
  mean_power /= static_cast<double>(std::max<size_t>(1, mc.samples.pixel_power.size()));
  NoiseParams np;
  np.responsivity = rx.electrical.responsivity;
  mc.noise = noise_sigma(rx.grid.pixel_area_m2() * 1e4, mean_power, np.bpf_bandwidth_hz, np);
  const int units = static_cast<int>(scene.units.size());

  auto row = [&](const std::string& label, GaussianFit ds, GaussianFit us) {
    ProbabilityRow r;
    r.label = label;
    r.ds = ds;
    r.us = us;
    r.sigma_t = mc.noise.sigma_t;
    if (ds.mean > us.mean) {
      r.threshold = optimal_threshold(ds, us, r.sigma_t);
      r.p = decision_probabilities(ds, us, r.sigma_t, r.threshold, units);
    } else {
      const double nan = std::nan("");
      r.threshold = nan;
      r.p = {nan, nan, nan, nan, nan};
    }
    mc.rows.push_back(r);
  };
  row("fitted", mc.fits.desired, mc.fits.undesired);
  row("narrow_spread", {mc.fits.desired.mean, kNarrowSpreadSigma},
      {mc.fits.undesired.mean, kNarrowSpreadSigma});

  if (mc.fits.desired.mean > mc.fits.undesired.mean) {
    const GaussianFit us{mc.fits.undesired.mean, kNarrowSpreadSigma};
    for (int k = 0; k <= 70; ++k) {
      const double sigma_ds = std::pow(10.0, -12.0 + 0.1 * k);
      const GaussianFit ds{mc.fits.desired.mean, sigma_ds};
      mc.threshold_sweep.push_back({sigma_ds, optimal_threshold(ds, us, mc.noise.sigma_t)});
    }
  }
  return mc;
}

std::string probability_csv(const MonteCarloResult& mc) {
  std::string out =
      "m_ds,sigma_ds,m_us,sigma_us,opt_th,P_cds,P_fus,P_cd,P_wd,sigma_t,samples,case,warning\n";
  for (const auto& r : mc.rows) {
    out += format_sci(r.ds.mean) + "," + format_sci(r.ds.sigma) + "," + format_sci(r.us.mean) +
           "," + format_sci(r.us.sigma) + "," + format_sci(r.threshold) + "," +
           format_sci(r.p.p_cds) + "," + format_sci(r.p.p_fus) + "," + format_sci(r.p.p_cd) +
           "," + format_sci(r.p.p_wd) + "," + format_sci(r.sigma_t) + "," +
           std::to_string(mc.samples.desired.size()) + "," + r.label + "," +
           (mc.low_sample ? "low_sample_count" : "") + "\n";
  }
  return out;
}

std::string samples_csv(const ToneSamples& s) {
  std::string out = "index,x,y,pixel,desired_a,undesired_a,pixel_power_w\n";
  for (size_t i = 0; i < s.desired.size(); ++i) {
    out += std::to_string(i) + "," + format_sci(s.positions[i].x) + "," +
           format_sci(s.positions[i].y) + "," + std::to_string(s.pixel[i]) + "," +
           format_sci(s.desired[i]) + "," + format_sci(s.undesired[i]) + "," +
           format_sci(s.pixel_power[i]) + "\n";
  }
  return out;
}

std::string histogram_csv(const std::vector<double>& values, int bins) {
  std::string out = "bin_low,bin_high,count\n";
  if (values.empty() || bins < 1) return out;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn;
  const double width = (*mx > lo) ? (*mx - lo) / bins : 1.0;
  std::vector<long> counts(static_cast<size_t>(bins), 0);
  for (double v : values) {
    int b = static_cast<int>((v - lo) / width);
    counts[static_cast<size_t>(std::clamp(b, 0, bins - 1))]++;
  }
  for (int b = 0; b < bins; ++b) {
    out += format_sci(lo + b * width) + "," + format_sci(lo + (b + 1) * width) + "," +
           std::to_string(counts[static_cast<size_t>(b)]) + "\n";
  }
  return out;
}

std::string threshold_sweep_csv(const MonteCarloResult& mc) {
  std::string out = "sigma_ds,opt_th,opt_th_over_m_ds\n";
  for (const auto& [s, th] : mc.threshold_sweep) {
    out += format_sci(s) + "," + format_sci(th) + "," + format_sci(th / mc.fits.desired.mean) + "\n";
  }
  return out;
}

namespace {

// Collects files for one command and writes them only at the end; on any
// failure nothing that this run created is left behind.
class OutputDir {
 public:
  explicit OutputDir(const std::string& path) : path_(path) {}

  void add(const std::string& name, std::string content) {
    files_.push_back({name, std::move(content)});
  }

  void commit() {
    std::error_code ec;
    const bool existed = fs::exists(path_, ec);
    if (existed && !fs::is_directory(path_)) {
      throw std::runtime_error("output path '" + path_ + "' is not a directory");
    }
    if (!existed) fs::create_directories(path_);
    std::vector<fs::path> written;
    try {
      for (const auto& [name, content] : files_) {
        const fs::path p = fs::path(path_) / name;
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
        written.push_back(p);
        out << content;
        out.close();
        if (!out) throw std::runtime_error("failed writing '" + p.string() + "'");
      }
    } catch (...) {
      for (const auto& p : written) fs::remove(p, ec);
      if (!existed) fs::remove_all(path_, ec);
      throw;
    }
  }

 private:
  std::string path_;
  std::vector<std::pair<std::string, std::string>> files_;
};

Point3 single_position(const RunConfig& c, const Scene& scene) {
  if (!c.pos) throw std::invalid_argument("this command needs --pos x,y");
  return position_on_floor(scene, c.pos->first, c.pos->second);
}

}  // namespace

void cmd_channel(const RunConfig& config, std::ostream& log) {
  config.validate();
  const SceneDocument doc = resolve_scene(config.scene);
  const Point3 p = single_position(config, doc.scene);
  const Tracer tracer(doc.scene, config.trace_options());
  const ChannelMatrix channel = tracer.trace(receiver_at(doc, p));
  OutputDir out(config.out);
  out.add("arrivals.csv", arrivals_csv(channel));
  out.add("delay_spread.csv", delay_spread_csv(channel));
  out.add("bandwidth.csv", bandwidth_csv(channel));
  out.commit();
  log << "channel: " << channel.units() << " units, " << tracer.elements_1st().size() << " / "
      << tracer.elements_2nd().size() << " elements, written to " << config.out << "\n";
}

void cmd_associate(const RunConfig& config, std::ostream& log) {
  config.validate();
  const SceneDocument doc = resolve_scene(config.scene);
  const Point3 p = single_position(config, doc.scene);
  const Tracer tracer(doc.scene, config.trace_options());
  const ImagingReceiver rx = receiver_at(doc, p);
  const HMatrix h = build_H(tracer.trace(rx));
  const auto cnr = cnr_over_i(h, doc.scene, rx);
  const AssociationResult assoc = associate(h, cnr, config.threshold_db);
  OutputDir out(config.out);
  out.add("h_matrix.csv", h_matrix_csv(h));
  out.add("cnr_i.csv", cnr_csv(h, cnr));
  out.add("association.csv", association_csv(assoc));
  out.commit();
  log << "associate: active units";
  for (int id : assoc.active_ids()) log << " " << id;
  log << "\n";
}

void cmd_montecarlo(const RunConfig& config, std::ostream& log) {
  config.validate();
  const SceneDocument doc = resolve_scene(config.scene);
  const Tracer tracer(doc.scene, config.trace_options());
  const ImagingReceiver rx = receiver_at(doc, {0.5 * doc.scene.room.width,
                                               0.5 * doc.scene.room.length, doc.scene.comm_floor_z});
  const MonteCarloResult mc = run_montecarlo(tracer, rx, config.samples, config.seed,
                                             config.desired_unit, config.interfering_unit);
  if (mc.low_sample) {
    log << "warning: only " << config.samples << " positions; fits from fewer than "
        << kLowSampleCount << " samples are unreliable\n";
  }
  OutputDir out(config.out);
  out.add("samples.csv", samples_csv(mc.samples));
  out.add("histogram_desired.csv", histogram_csv(mc.samples.desired, 40));
  out.add("histogram_undesired.csv", histogram_csv(mc.samples.undesired, 40));
  out.add("probability.csv", probability_csv(mc));
  out.add("threshold_sweep.csv", threshold_sweep_csv(mc));
  out.commit();
  for (const auto& r : mc.rows) {
    log << "montecarlo " << r.label << ": opt_th " << format_sci(r.threshold) << " A, P_wd "
        << format_sci(r.p.p_wd) << "\n";
  }
}

void cmd_sweep(const RunConfig& config, std::ostream& log) {
  config.validate();
  const SceneDocument doc = resolve_scene(config.scene);
  std::vector<Point3> positions;
  if (config.grid) {
    positions = sweep_positions(doc.scene, *config.grid);
  } else if (config.pos) {
    positions.push_back(single_position(config, doc.scene));
  } else {
    throw std::invalid_argument("sweep needs --grid or --pos");
  }
  const Tracer tracer(doc.scene, config.trace_options());
  LinkParams params;
  params.threshold_db = config.threshold_db;
  std::vector<LinkReport> reports(positions.size());
  parallel_for(positions.size(), [&](size_t i) {
    reports[i] = evaluate_position(tracer, receiver_at(doc, positions[i]), params);
  });
  OutputDir out(config.out);
  out.add("link_report.csv", link_report_csv(reports));
  out.add("heatmap.csv", heatmap_csv(reports));
  out.commit();
  log << "sweep: " << reports.size() << " positions written to " << config.out << "\n";
}

}  // namespace owc

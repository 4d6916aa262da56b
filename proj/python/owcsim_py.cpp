#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "owcsim/link.hpp"
#include "owcsim/report.hpp"
#include "owcsim/scene_io.hpp"

namespace py = pybind11;

namespace {

// Tracer bound to a scene document, plus convenience evaluations at (x, y).
class Simulator {
 public:
  Simulator(const std::string& scene, double elem1, double elem2, bool full_resolution)
      : doc_(owc::resolve_scene(scene)), tracer_(doc_.scene, options(elem1, elem2, full_resolution)) {}

  owc::ChannelMatrix channel_at(double x, double y) const {
    return tracer_.trace(rx(x, y));
  }

  py::list arrivals(double x, double y, int unit) const {
    const auto ch = channel_at(x, y);
    const int u = doc_.scene.unit_index(unit);
    py::list out;
    for (int p = 0; p < ch.pixels; ++p) {
      for (const auto& a : ch.at(u, p)) out.append(py::make_tuple(p, a.delay_s, a.power_w, a.order));
    }
    return out;
  }

  py::list channel_summary(double x, double y) const {
    const auto ch = channel_at(x, y);
    py::list out;
    for (int u = 0; u < ch.units(); ++u) {
      const auto arrivals = owc::unit_channel(ch, u);
      py::dict d;
      d["unit"] = ch.unit_ids[static_cast<size_t>(u)];
      d["total_power_w"] = owc::total_power(arrivals);
      const bool any = owc::total_power(arrivals) > 0;
      d["delay_spread_s"] = any ? owc::delay_spread(arrivals) : 0.0;
      d["bandwidth_3db_hz"] = any ? owc::bandwidth_3db(arrivals) : 0.0;
      out.append(d);
    }
    return out;
  }

  std::vector<int> active_units(double x, double y, double threshold_db) const {
    const auto r = rx(x, y);
    const auto h = owc::build_H(tracer_.trace(r));
    return owc::associate(h, owc::cnr_over_i(h, doc_.scene, r), threshold_db).active_ids();
  }

  py::dict evaluate(double x, double y) const {
    const auto report = owc::evaluate_position(tracer_, rx(x, y));
    py::dict d;
    d["x"] = report.position.x;
    d["y"] = report.position.y;
    d["aggregate_bps"] = report.aggregate_bps;
    py::list units;
    for (const auto& u : report.units) {
      py::dict e;
      e["unit"] = u.unit;
      e["active"] = u.active;
      e["rate_bps"] = u.rate_bps;
      e["sinr_db"] = u.sinr_db;
      e["serving"] = u.serving;
      units.append(e);
    }
    d["units"] = units;
    return d;
  }

  size_t element_count(int order) const {
    return order == 1 ? tracer_.elements_1st().size() : tracer_.elements_2nd().size();
  }

 private:
  static owc::TraceOptions options(double e1, double e2, bool full) {
    if (full) return owc::TraceOptions::full_resolution();
    owc::TraceOptions o;
    o.element_size_1st = e1;
    o.element_size_2nd = e2;
    return o;
  }
  owc::ImagingReceiver rx(double x, double y) const {
    return owc::receiver_at(doc_, owc::position_on_floor(doc_.scene, x, y));
  }

  owc::SceneDocument doc_;
  owc::Tracer tracer_;
};

void run_command(const std::string& command, const std::string& scene, const std::string& out,
                 py::object pos, const std::string& grid, uint64_t seed, int samples,
                 double threshold_db) {
  owc::RunConfig c;
  c.scene = scene;
  c.out = out;
  c.seed = seed;
  c.samples = samples;
  c.threshold_db = threshold_db;
  if (!pos.is_none()) c.pos = pos.cast<std::pair<double, double>>();
  if (!grid.empty()) c.grid = owc::parse_grid(grid);
  std::ostringstream log;
  if (command == "channel") {
    owc::cmd_channel(c, log);
  } else if (command == "associate") {
    owc::cmd_associate(c, log);
  } else if (command == "montecarlo") {
    owc::cmd_montecarlo(c, log);
  } else if (command == "sweep") {
    owc::cmd_sweep(c, log);
  } else {
    throw py::value_error("unknown command '" + command + "'");
  }
}

}  // namespace

PYBIND11_MODULE(_owcsim, m) {
  m.doc() = "Indoor visible-light channel and link simulator";

  py::register_exception<owc::SceneSyntaxError>(m, "SceneSyntaxError", PyExc_ValueError);
  py::register_exception<owc::SceneSemanticError>(m, "SceneSemanticError", PyExc_ValueError);

  m.def("lambert_order", &owc::lambert_order, py::arg("semi_angle_deg"));
  m.def("lambertian_intensity", &owc::lambertian_intensity, py::arg("power_w"), py::arg("n"),
        py::arg("phi_rad"));
  m.def("gain", &owc::gain, py::arg("psi_rad"), py::arg("refractive_index") = 1.7);
  m.def("transmission", [](double d) { return owc::transmission(d); }, py::arg("delta_rad"));
  m.def("pixel_bandwidth", [](double a) { return owc::pixel_bandwidth(a); },
        py::arg("pixel_area_m2"));
  m.def("max_ook_rate", &owc::max_ook_rate, py::arg("bandwidth_hz"));
  m.def("ber", &owc::ber, py::arg("sinr"));
  m.def("sinr_for_ber", &owc::sinr_for_ber, py::arg("target_ber"));
  m.def(
      "optimal_threshold",
      [](double m_ds, double s_ds, double m_us, double s_us, double sigma_t) {
        return owc::optimal_threshold({m_ds, s_ds}, {m_us, s_us}, sigma_t);
      },
      py::arg("m_ds"), py::arg("sigma_ds"), py::arg("m_us"), py::arg("sigma_us"),
      py::arg("sigma_t"));
  m.def(
      "decision_probabilities",
      [](double m_ds, double s_ds, double m_us, double s_us, double sigma_t, double th, int units) {
        const auto p = owc::decision_probabilities({m_ds, s_ds}, {m_us, s_us}, sigma_t, th, units);
        py::dict d;
        d["P_cds"] = p.p_cds;
        d["P_fus"] = p.p_fus;
        d["P_cus"] = p.p_cus;
        d["P_cd"] = p.p_cd;
        d["P_wd"] = p.p_wd;
        return d;
      },
      py::arg("m_ds"), py::arg("sigma_ds"), py::arg("m_us"), py::arg("sigma_us"),
      py::arg("sigma_t"), py::arg("threshold"), py::arg("units"));
  m.def(
      "scene_text",
      [](const std::string& source) {
        return owc::serialize_scene_document(owc::resolve_scene(source));
      },
      py::arg("source") = "room-a");
  m.def(
      "parse_scene",
      [](const std::string& text) { return owc::serialize_scene(owc::parse_scene(text)); },
      py::arg("text"), "Parse and re-serialize a scene; raises on invalid input.");
  m.def("run", &run_command, py::arg("command"), py::arg("scene") = "room-a",
        py::arg("out") = "out", py::arg("pos") = py::none(), py::arg("grid") = "",
        py::arg("seed") = 1, py::arg("samples") = 1000,
        py::arg("threshold_db") = owc::kAssociationThresholdDb);

  py::class_<Simulator>(m, "Simulator")
      .def(py::init<const std::string&, double, double, bool>(), py::arg("scene") = "room-a",
           py::arg("elem1") = 0.25, py::arg("elem2") = 0.5, py::arg("full_resolution") = false)
      .def("arrivals", &Simulator::arrivals, py::arg("x"), py::arg("y"), py::arg("unit"))
      .def("channel_summary", &Simulator::channel_summary, py::arg("x"), py::arg("y"))
      .def("active_units", &Simulator::active_units, py::arg("x"), py::arg("y"),
           py::arg("threshold_db") = owc::kAssociationThresholdDb)
      .def("evaluate", &Simulator::evaluate, py::arg("x"), py::arg("y"))
      .def("element_count", &Simulator::element_count, py::arg("order"));
}

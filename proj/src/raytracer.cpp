#include "owcsim/raytracer.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "owcsim/parallel.hpp"

namespace owc {

double lambert_order(double semi_angle_deg) {
  if (!(semi_angle_deg > 0.0 && semi_angle_deg < 90.0)) {
    throw std::domain_error("semi-angle must lie in (0, 90) degrees");
  }
  return -std::log(2.0) / std::log(std::cos(deg_to_rad(semi_angle_deg)));
}

namespace {

// Intensity per watt for a given cos(phi).
inline double lambert_factor(double n, double cos_phi) {
  if (!(cos_phi > 0.0)) return 0.0;
  return (n + 1.0) / (2.0 * kPi) * std::pow(cos_phi, n);
}

const Vec3 kDown{0.0, 0.0, -1.0};

}  // namespace

double lambertian_intensity(double total_power_w, double n, double phi_rad) {
  return total_power_w * lambert_factor(n, std::cos(phi_rad));
}

double total_power(const std::vector<Arrival>& arrivals) {
  double sum = 0.0;
  for (const auto& a : arrivals) sum += a.power_w;
  return sum;
}

TraceOptions TraceOptions::full_resolution() {
  TraceOptions o;
  o.element_size_1st = 0.05;
  o.element_size_2nd = 0.20;
  o.above_comm_floor_only = true;
  return o;
}

std::vector<Arrival> ChannelMatrix::gather(int unit_index, const std::vector<int>& subset) const {
  std::vector<Arrival> out;
  for (int p : subset) {
    const auto& c = at(unit_index, p);
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

std::vector<int> ChannelMatrix::los_pixels(int unit_index) const {
  std::vector<int> out;
  for (int p = 0; p < pixels; ++p) {
    for (const auto& a : at(unit_index, p)) {
      if (a.order == 0) {
        out.push_back(p);
        break;
      }
    }
  }
  return out;
}

Tracer::Tracer(const Scene& scene, const TraceOptions& options)
    : scene_(scene),
      vis_(scene),
      elem1_size_(options.element_size_1st),
      elem2_size_(options.element_size_2nd),
      max_order_(options.max_order) {
  scene_.validate();
  DiscretizeOptions d;
  if (options.above_comm_floor_only) d.min_center_z = scene.comm_floor_z;
  if (max_order_ >= 1) elem1_ = discretize(scene_, elem1_size_, d);
  if (max_order_ >= 2) elem2_ = discretize(scene_, elem2_size_, d);
  precompute();
}

Tracer::Tracer(const Scene& scene, std::vector<SurfaceElement> elements_1st,
               std::vector<SurfaceElement> elements_2nd, int max_order)
    : scene_(scene),
      vis_(scene),
      max_order_(max_order),
      elem1_(std::move(elements_1st)),
      elem2_(std::move(elements_2nd)) {
  scene_.validate();
  if (max_order_ < 1) elem1_.clear();
  if (max_order_ < 2) elem2_.clear();
  precompute();
}

void Tracer::precompute() {
  // Source to element: power landing on the element, times its rho.
  auto source_link = [this](const Point3& src, double power, double n,
                            const SurfaceElement& e, int index, std::vector<Link>& out) {
    const Vec3 d = e.center - src;
    const double len = d.norm();
    if (len <= 0.0) return;
    const double cos_phi = dot(kDown, d) / len;
    const double cos_in = -dot(e.normal.vec(), d) / len;
    if (!(cos_phi > 0.0) || !(cos_in > 0.0)) return;
    if (!vis_.visible(src, e.center)) return;
    const double g = power * lambert_factor(n, cos_phi) * cos_in * e.area / (len * len) * e.rho;
    out.push_back({index, g, len});
  };

  const size_t nu = scene_.units.size();
  src1_.assign(nu, {});
  src2_.assign(nu, {});
  parallel_for(nu, [&](size_t u) {
    const LightUnit& unit = scene_.units[u];
    if (!elem1_.empty()) {
      for (const Point3& em : unit.emitters()) {
        std::vector<Link> links;
        for (size_t k = 0; k < elem1_.size(); ++k) {
          source_link(em, unit.emitter_power_w, unit.lambert_n, elem1_[k], static_cast<int>(k),
                      links);
        }
        src1_[u].push_back(std::move(links));
      }
    }
    for (size_t k = 0; k < elem2_.size(); ++k) {
      source_link(unit.center, unit.total_power_w(), unit.lambert_n, elem2_[k],
                  static_cast<int>(k), src2_[u]);
    }
  });

  const size_t ne = elem2_.size();
  std::vector<std::vector<Link>> rows(ne);
  parallel_for(ne, [&](size_t i) {
    const SurfaceElement& a = elem2_[i];
    for (size_t j = 0; j < ne; ++j) {
      if (j == i) continue;
      const SurfaceElement& b = elem2_[j];
      if (a.surface == b.surface) continue;
      const Vec3 d = b.center - a.center;
      const double len = d.norm();
      if (len <= 0.0) continue;
      const double cos_out = dot(a.normal.vec(), d) / len;
      const double cos_in = -dot(b.normal.vec(), d) / len;
      if (!(cos_out > 0.0) || !(cos_in > 0.0)) continue;
      if (!vis_.visible(a.center, b.center)) continue;
      const double g = lambert_factor(a.lambert_n, cos_out) * cos_in * b.area / (len * len) * b.rho;
      rows[i].push_back({static_cast<int>(j), g, len});
    }
  });
  k_offset_.assign(ne + 1, 0);
  for (size_t i = 0; i < ne; ++i) k_offset_[i + 1] = k_offset_[i] + rows[i].size();
  k_links_.clear();
  k_links_.reserve(k_offset_[ne]);
  for (auto& r : rows) k_links_.insert(k_links_.end(), r.begin(), r.end());
}

std::vector<Tracer::RxLink> Tracer::rx_links(const std::vector<SurfaceElement>& elements,
                                             const ImagingReceiver& rx) const {
  std::vector<RxLink> out(elements.size());
  for (size_t k = 0; k < elements.size(); ++k) {
    const SurfaceElement& e = elements[k];
    const Vec3 d = rx.position - e.center;
    const double len = d.norm();
    if (len <= 0.0) continue;
    const double cos_out = dot(e.normal.vec(), d) / len;
    if (!(cos_out > 0.0)) continue;
    const Direction3 incidence = Direction3::from(-d);
    const auto pixel = rx.pixel_for_direction(incidence);
    if (!pixel) continue;
    if (!vis_.visible(e.center, rx.position)) continue;
    const double g = lambert_factor(e.lambert_n, cos_out) * rx.effective_area(incidence.z()) /
                     (len * len);
    if (!(g > 0.0)) continue;
    out[k] = {*pixel, g, len};
  }
  return out;
}

std::vector<std::vector<Arrival>> Tracer::trace_unit(int unit_index, const ImagingReceiver& rx,
                                                     const std::vector<RxLink>& rx1,
                                                     const std::vector<RxLink>& rx2) const {
  const LightUnit& unit = scene_.units.at(static_cast<size_t>(unit_index));
  std::vector<std::vector<Arrival>> cells(static_cast<size_t>(rx.pixel_count()));
  const std::vector<Point3> emitters = unit.emitters();

  for (const Point3& em : emitters) {
    const Vec3 d = rx.position - em;
    const double len = d.norm();
    if (len <= 0.0) continue;
    const double cos_phi = dot(kDown, d) / len;
    if (!(cos_phi > 0.0)) continue;
    const Direction3 incidence = Direction3::from(-d);
    const auto pixel = rx.pixel_for_direction(incidence);
    if (!pixel) continue;
    if (!vis_.visible(em, rx.position)) continue;
    const double p = unit.emitter_power_w * lambert_factor(unit.lambert_n, cos_phi) *
                     rx.effective_area(incidence.z()) / (len * len);
    if (!(p > 0.0)) continue;
    cells[static_cast<size_t>(*pixel)].push_back({len / kSpeedOfLight, p, unit.id, 0});
  }

  if (max_order_ >= 1) {
    for (const auto& links : src1_[static_cast<size_t>(unit_index)]) {
      for (const Link& l : links) {
        const RxLink& r = rx1[static_cast<size_t>(l.to)];
        if (r.pixel < 0) continue;
        cells[static_cast<size_t>(r.pixel)].push_back(
            {(l.length + r.length) / kSpeedOfLight, l.gain * r.gain, unit.id, 1});
      }
    }
  }

  if (max_order_ >= 2) {
    for (const Link& l1 : src2_[static_cast<size_t>(unit_index)]) {
      const size_t begin = k_offset_[static_cast<size_t>(l1.to)];
      const size_t end = k_offset_[static_cast<size_t>(l1.to) + 1];
      for (size_t k = begin; k < end; ++k) {
        const Link& l2 = k_links_[k];
        const RxLink& r = rx2[static_cast<size_t>(l2.to)];
        if (r.pixel < 0) continue;
        cells[static_cast<size_t>(r.pixel)].push_back(
            {(l1.length + l2.length + r.length) / kSpeedOfLight, l1.gain * l2.gain * r.gain,
             unit.id, 2});
      }
    }
  }
  return cells;
}

std::vector<std::vector<Arrival>> Tracer::trace_unit(int unit_index,
                                                     const ImagingReceiver& rx) const {
  if (!scene_.room.contains(rx.position)) {
    throw std::invalid_argument("receiver position is outside the room");
  }
  return trace_unit(unit_index, rx, rx_links(elem1_, rx), rx_links(elem2_, rx));
}

ChannelMatrix Tracer::trace(const ImagingReceiver& rx) const {
  if (!scene_.room.contains(rx.position)) {
    throw std::invalid_argument("receiver position is outside the room");
  }
  ChannelMatrix h;
  h.pixels = rx.pixel_count();
  h.element_size_1st = elem1_size_;
  h.element_size_2nd = elem2_size_;
  h.max_order = max_order_;
  for (const auto& u : scene_.units) h.unit_ids.push_back(u.id);
  h.cells.resize(scene_.units.size() * static_cast<size_t>(h.pixels));

  const auto rx1 = rx_links(elem1_, rx);
  const auto rx2 = rx_links(elem2_, rx);
  parallel_for(scene_.units.size(), [&](size_t u) {
    auto cells = trace_unit(static_cast<int>(u), rx, rx1, rx2);
    for (int p = 0; p < h.pixels; ++p) {
      h.at(static_cast<int>(u), p) = std::move(cells[static_cast<size_t>(p)]);
    }
  });
  return h;
}

std::vector<std::vector<Arrival>> trace(const LightUnit& unit, const Scene& scene,
                                        const ImagingReceiver& rx,
                                        const std::vector<SurfaceElement>& elements_1st,
                                        const std::vector<SurfaceElement>& elements_2nd) {
  Scene single = scene;
  single.units = {unit};
  Tracer tracer(single, elements_1st, elements_2nd, 2);
  return tracer.trace_unit(0, rx);
}

}  // namespace owc

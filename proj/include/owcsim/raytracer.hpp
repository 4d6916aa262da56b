#pragma once

#include <cstdint>
#include <vector>

#include "owcsim/receiver.hpp"
#include "owcsim/scene.hpp"

namespace owc {

struct Arrival {
  double delay_s = 0.0;
  double power_w = 0.0;
  int unit = 0;   // source unit id
  int order = 0;  // 0 = LOS, 1 = first reflection, 2 = second reflection
};

// n = -ln 2 / ln cos(semi_angle). Throws std::domain_error outside (0, 90).
double lambert_order(double semi_angle_deg);

// Generalized Lambertian radiant intensity P (n + 1) / (2 pi) cos^n(phi), W/sr.
// Zero for phi >= pi/2.
double lambertian_intensity(double total_power_w, double n, double phi_rad);

double total_power(const std::vector<Arrival>& arrivals);

struct TraceOptions {
  double element_size_1st = 0.25;  // m
  double element_size_2nd = 0.5;   // m
  int max_order = 2;
  // Keep only elements centred at or above the communication floor, which is
  // how the 32000 / 2000 element counts of the full-resolution mode arise.
  bool above_comm_floor_only = false;

  static TraceOptions full_resolution();
};

// Arrival lists for every (unit, pixel) pair, stored unit-major.
struct ChannelMatrix {
  std::vector<int> unit_ids;
  int pixels = 0;
  double element_size_1st = 0.0;
  double element_size_2nd = 0.0;
  int max_order = 0;
  std::vector<std::vector<Arrival>> cells;

  int units() const { return static_cast<int>(unit_ids.size()); }
  const std::vector<Arrival>& at(int unit_index, int pixel) const {
    return cells[static_cast<size_t>(unit_index) * pixels + pixel];
  }
  std::vector<Arrival>& at(int unit_index, int pixel) {
    return cells[static_cast<size_t>(unit_index) * pixels + pixel];
  }
  // All arrivals of one unit over the given pixels, pixel-major.
  std::vector<Arrival> gather(int unit_index, const std::vector<int>& pixels_subset) const;
  // Pixels that receive at least one LOS arrival from the unit.
  std::vector<int> los_pixels(int unit_index) const;
};

// Traces LOS, first- and second-order paths from every unit of a scene to an
// imaging receiver. Everything that does not depend on the receiver position
// (elements, source-to-element transfers, element-to-element coupling) is
// computed once in the constructor, so sweeping positions is cheap.
//
// LOS and first-order paths start at each emitter of a unit; second-order
// paths start at the unit centre carrying the whole unit power. Per-cell
// order: LOS by emitter, first order by emitter then element, second order by
// first element then second element.
class Tracer {
 public:
  Tracer(const Scene& scene, const TraceOptions& options = {});
  // Uses the given element lists instead of discretizing the scene.
  Tracer(const Scene& scene, std::vector<SurfaceElement> elements_1st,
         std::vector<SurfaceElement> elements_2nd, int max_order = 2);

  ChannelMatrix trace(const ImagingReceiver& rx) const;
  // Per-pixel arrivals from one unit.
  std::vector<std::vector<Arrival>> trace_unit(int unit_index, const ImagingReceiver& rx) const;

  const Scene& scene() const { return scene_; }
  const std::vector<SurfaceElement>& elements_1st() const { return elem1_; }
  const std::vector<SurfaceElement>& elements_2nd() const { return elem2_; }

 private:
  struct Link {
    int to;
    double gain;    // power fraction delivered to `to` (includes its rho)
    double length;  // m
  };
  struct RxLink {
    int pixel = -1;  // -1 when the element cannot reach the receiver
    double gain = 0.0;
    double length = 0.0;
  };
  void precompute();
  std::vector<RxLink> rx_links(const std::vector<SurfaceElement>& elements,
                               const ImagingReceiver& rx) const;
  std::vector<std::vector<Arrival>> trace_unit(int unit_index, const ImagingReceiver& rx,
                                               const std::vector<RxLink>& rx1,
                                               const std::vector<RxLink>& rx2) const;

  Scene scene_;
  VisibilityIndex vis_;
  double elem1_size_ = 0.0;
  double elem2_size_ = 0.0;
  int max_order_ = 2;
  std::vector<SurfaceElement> elem1_;
  std::vector<SurfaceElement> elem2_;
  // [unit][emitter] -> links to elem1_ (first order).
  std::vector<std::vector<std::vector<Link>>> src1_;
  // [unit] -> links from the unit centre to elem2_.
  std::vector<std::vector<Link>> src2_;
  // CSR element-to-element coupling over elem2_.
  std::vector<size_t> k_offset_;
  std::vector<Link> k_links_;
};

// Single-unit trace with explicit element lists.
std::vector<std::vector<Arrival>> trace(const LightUnit& unit, const Scene& scene,
                                        const ImagingReceiver& rx,
                                        const std::vector<SurfaceElement>& elements_1st,
                                        const std::vector<SurfaceElement>& elements_2nd);

}  // namespace owc

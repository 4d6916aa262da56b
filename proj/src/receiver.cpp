#include "owcsim/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace owc {

double PixelGrid::pitch_m() const { return std::sqrt(pixel_area_m2()); }

double PixelGrid::half_diagonal_m() const {
  const double p = pitch_m();
  return 0.5 * p * std::hypot(static_cast<double>(rows), static_cast<double>(cols));
}

double gain(double psi_rad, double refractive_index) {
  if (!(psi_rad > 0.0)) throw std::domain_error("concentrator gain needs psi > 0");
  const double s = std::sin(psi_rad);
  return refractive_index * refractive_index / (s * s);
}

double transmission(double delta_rad, const Concentrator& c) {
  const double t = (c.c2 * delta_rad + c.c1) * delta_rad + c.c0;
  return std::clamp(t, 0.0, 1.0);
}

double pixel_bandwidth(double pixel_area_m2, const PhotodetectorElectrical& e) {
  if (!(pixel_area_m2 > 0.0)) throw std::domain_error("pixel area must be positive");
  const double capacitance = kVacuumPermittivity * e.eps_r * pixel_area_m2 / e.thickness_m;
  return 1.0 / (2.0 * kPi * e.load_ohm * capacitance);
}

double max_ook_rate(double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw std::domain_error("bandwidth must be positive");
  return bandwidth_hz / 0.7;
}

double ImagingReceiver::image_scale_m() const {
  return grid.half_diagonal_m() / std::tan(optics.acceptance_rad());
}

std::optional<int> ImagingReceiver::pixel_for_direction(const Direction3& incidence) const {
  const double cos_theta = incidence.z();
  if (!(cos_theta > 0.0)) return std::nullopt;
  if (cos_theta < std::cos(optics.acceptance_rad())) return std::nullopt;

  const double s = image_scale_m() / grid.pitch_m();  // pixels per unit tan
  const double u = s * incidence.x() / cos_theta;
  const double v = s * incidence.y() / cos_theta;
  const int col = std::clamp(static_cast<int>(std::ceil(u + 0.5 * grid.cols)) - 1, 0, grid.cols - 1);
  const int row = std::clamp(static_cast<int>(std::ceil(v + 0.5 * grid.rows)) - 1, 0, grid.rows - 1);
  return row * grid.cols + col;
}

double ImagingReceiver::effective_area(double cos_delta) const {
  const double acc = optics.acceptance_rad();
  if (!(cos_delta > 0.0) || cos_delta < std::cos(acc)) return 0.0;
  const double delta = std::acos(std::min(cos_delta, 1.0));
  return optics.entrance_area_m2 * transmission(delta, optics) *
         gain(acc, optics.refractive_index) * cos_delta;
}

double ImagingReceiver::rate_cap_bps() const {
  return std::min(max_ook_rate(pixel_bandwidth_hz()), max_ook_rate(electrical.data_bandwidth_hz));
}

double ImagingReceiver::center_pixel_fov_deg() const {
  return 0.5 * rad_to_deg(std::atan(grid.pitch_m() / image_scale_m()));
}

}  // namespace owc

#pragma once

#include <optional>

#include "owcsim/geometry.hpp"

namespace owc {

inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m

struct Concentrator {
  double entrance_area_m2 = 9.0 * kPi / 4.0 * 1e-4;  // 3 cm entrance diameter
  double refractive_index = 1.7;
  double acceptance_deg = 65.0;
  // Transmission factor T(delta) = c2 delta^2 + c1 delta + c0, delta in radians.
  double c2 = -0.1982;
  double c1 = 0.0425;
  double c0 = 0.8778;

  double acceptance_rad() const { return deg_to_rad(acceptance_deg); }
  bool operator==(const Concentrator&) const = default;
};

struct PixelGrid {
  int rows = 16;  // along y
  int cols = 18;  // along x
  double detector_area_m2 = 2e-4;

  int count() const { return rows * cols; }
  double pixel_area_m2() const { return detector_area_m2 / count(); }
  double pitch_m() const;
  double half_diagonal_m() const;
  bool operator==(const PixelGrid&) const = default;
};

struct PhotodetectorElectrical {
  double responsivity = 0.4;      // A/W
  double load_ohm = 50.0;
  double thickness_m = 100e-6;
  double eps_r = 11.68;           // silicon
  double data_bandwidth_hz = 4e9;
  bool operator==(const PhotodetectorElectrical&) const = default;
};

// Concentrator gain N^2 / sin^2(psi). Throws std::domain_error for psi <= 0.
double gain(double psi_rad, double refractive_index = 1.7);

// Concentrator transmission polynomial, clamped to [0, 1].
double transmission(double delta_rad, const Concentrator& c = {});

// RC-limited bandwidth of a pixel of the given area.
double pixel_bandwidth(double pixel_area_m2, const PhotodetectorElectrical& e = {});

// OOK needs a receiver bandwidth of 0.7 times the bit rate.
double max_ook_rate(double bandwidth_hz);

struct PixelCoord {
  int row = 0;
  int col = 0;
};

// Upward-facing imaging receiver (elevation 90 deg, azimuth 0 deg) with its
// aperture centre at `position`.
struct ImagingReceiver {
  Point3 position{2.0, 4.0, 1.0};
  Concentrator optics;
  PixelGrid grid;
  PhotodetectorElectrical electrical;

  int pixel_count() const { return grid.count(); }

  // Image-plane position of an incidence direction (pointing from the
  // receiver toward the source): u = s tan(theta) cos(alpha), v = s tan(theta)
  // sin(alpha), with s such that theta = acceptance lands on the detector
  // half-diagonal.
  double image_scale_m() const;

  // Pixel index row * cols + col, or nullopt when the direction is outside
  // the acceptance cone. Images that fall past the detector edge are assigned
  // to the nearest edge pixel, so every accepted direction lands on exactly
  // one pixel. Points exactly on a pixel boundary go to the lower index.
  std::optional<int> pixel_for_direction(const Direction3& incidence) const;

  PixelCoord coord(int pixel) const { return {pixel / grid.cols, pixel % grid.cols}; }

  // Collected optical power per unit irradiance (m^2) for a ray arriving at
  // angle delta from the normal: A * T(delta) * g(acceptance) * cos(delta).
  // Zero outside the acceptance cone.
  double effective_area(double cos_delta) const;

  double pixel_bandwidth_hz() const { return pixel_bandwidth(grid.pixel_area_m2(), electrical); }
  // Highest OOK rate both the pixel and the data path support.
  double rate_cap_bps() const;

  // Half-angle subtended by the centre pixel, degrees.
  double center_pixel_fov_deg() const;
};

}  // namespace owc

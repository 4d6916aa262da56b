#pragma once

#include <string>
#include <vector>

#include "owcsim/geometry.hpp"

namespace owc {

// Planar rectangle: origin + s*edge_u + t*edge_v for s, t in [0, 1]. The
// reflecting side faces cross(edge_u, edge_v).
struct ReflectingSurface {
  Point3 origin;
  Vec3 edge_u;
  Vec3 edge_v;
  double rho = 0.0;
  std::string label;

  Direction3 normal() const { return Direction3::from(cross(edge_u, edge_v)); }
  double area() const { return cross(edge_u, edge_v).norm(); }
  bool operator==(const ReflectingSurface&) const = default;
};

struct SurfaceElement {
  Point3 center;
  Direction3 normal;
  double area = 0.0;  // dA, m^2
  double rho = 0.0;
  double lambert_n = 1.0;
  int surface = -1;   // index into Scene::surfaces
};

// Axis-aligned box that absorbs everything crossing it.
struct Occluder {
  Point3 lo;
  Point3 hi;
  std::string label;
  bool operator==(const Occluder&) const = default;
};

struct ToneConfig {
  double frequency_hz = 500e6;
  // Tone amplitude relative to the emitter's mean optical power.
  double modulation_index = 1.0;
  bool operator==(const ToneConfig&) const = default;
};

inline constexpr double kToneLowHz = 500e6;
inline constexpr double kToneHighHz = 920e6;
inline constexpr double kToneGuardHz = 60e6;

inline double default_tone_hz(int unit_id) { return kToneLowHz + kToneGuardHz * (unit_id - 1); }

struct LightUnit {
  int id = 1;
  Point3 center;
  double emitter_spacing = 0.03;  // m between neighbouring emitters
  int grid = 3;                   // grid x grid emitters
  double emitter_power_w = 1.9;
  double lambert_n = 0.65;
  ToneConfig tone;

  // Emitter positions, row-major over (dy, dx) offsets in {-1, 0, 1} * spacing.
  std::vector<Point3> emitters() const;
  int emitter_count() const { return grid * grid; }
  double total_power_w() const { return emitter_power_w * emitter_count(); }
  bool operator==(const LightUnit&) const = default;
};

struct RoomBox {
  double width = 4.0;   // x
  double length = 8.0;  // y
  double height = 3.0;  // z
  bool contains(const Point3& p, double tol = 1e-9) const {
    return p.x >= -tol && p.x <= width + tol && p.y >= -tol && p.y <= length + tol &&
           p.z >= -tol && p.z <= height + tol;
  }
  bool operator==(const RoomBox&) const = default;
};

struct Scene {
  RoomBox room;
  std::vector<ReflectingSurface> surfaces;
  std::vector<Occluder> occluders;
  std::vector<LightUnit> units;
  double comm_floor_z = 1.0;

  // Throws SceneSemanticError (scene_io.hpp) on the first violated invariant.
  void validate() const;
  const LightUnit& unit(int id) const;
  int unit_index(int id) const;
  bool operator==(const Scene&) const = default;
};

// Unfurnished 4 x 8 x 3 m room with eight ceiling units.
Scene build_room_a();

// Furnished office: windows and a door (rho = 0), bookshelf walls at x = 4 and
// y = 8 (rho = 0.4), desks and a table as reflecting boxes, two cubicles with
// absorbing partitions. Layout version 1, frozen in data/presets/room_b_v1.scene.
Scene build_room_b();

struct DiscretizeOptions {
  // Keep only elements whose centre is at or above this height. The default
  // keeps everything.
  double min_center_z = -1e300;
};

// Splits every reflecting surface with rho > 0 into square cells of side
// element_size. Cells clipped by a surface edge keep their reduced area.
// Order: surfaces in scene order, then along edge_u, then along edge_v.
std::vector<SurfaceElement> discretize(const Scene& scene, double element_size,
                                       const DiscretizeOptions& options = {});

// Precomputed occlusion test for a scene. Only surfaces that do not lie on the
// room boundary can block a segment between two points inside the room.
class VisibilityIndex {
 public:
  explicit VisibilityIndex(const Scene& scene);
  bool visible(const Point3& p, const Point3& q) const;
  bool trivially_open() const { return boxes_.empty() && blockers_.empty(); }

 private:
  bool blocked(const Point3& p, const Point3& q) const;
  std::vector<Occluder> boxes_;
  std::vector<ReflectingSurface> blockers_;
};

bool visible(const Point3& p, const Point3& q, const Scene& scene);

// Mirror images used by the symmetry checks.
Scene mirror_x(const Scene& scene);  // x -> width - x
Scene mirror_y(const Scene& scene);  // y -> length - y

}  // namespace owc

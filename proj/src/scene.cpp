#include "owcsim/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <tuple>

#include "owcsim/scene_io.hpp"

namespace owc {

std::vector<Point3> LightUnit::emitters() const {
  std::vector<Point3> out;
  out.reserve(static_cast<size_t>(emitter_count()));
  const double mid = 0.5 * (grid - 1);
  for (int j = 0; j < grid; ++j) {
    for (int i = 0; i < grid; ++i) {
      out.push_back(center + Vec3{(i - mid) * emitter_spacing, (j - mid) * emitter_spacing, 0.0});
    }
  }
  return out;
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw SceneSemanticError(msg, 0);
}

bool on_room_boundary(const ReflectingSurface& s, const RoomBox& room) {
  const Vec3 n = cross(s.edge_u, s.edge_v);
  const double tol = 1e-9;
  auto axis_plane = [&](double nc, double oc, double extent) {
    return std::abs(nc) > 0.0 && (std::abs(oc) < tol || std::abs(oc - extent) < tol);
  };
  const bool nx = std::abs(n.y) < tol * n.norm() && std::abs(n.z) < tol * n.norm();
  const bool ny = std::abs(n.x) < tol * n.norm() && std::abs(n.z) < tol * n.norm();
  const bool nz = std::abs(n.x) < tol * n.norm() && std::abs(n.y) < tol * n.norm();
  if (nx) return axis_plane(n.x, s.origin.x, room.width);
  if (ny) return axis_plane(n.y, s.origin.y, room.length);
  if (nz) return axis_plane(n.z, s.origin.z, room.height);
  return false;
}

}  // namespace

void Scene::validate() const {
  require(room.width > 0 && room.length > 0 && room.height > 0, "room dimensions must be positive");
  require(comm_floor_z >= 0 && comm_floor_z < room.height,
          "communication floor must lie inside the room");
  for (const auto& s : surfaces) {
    const std::string tag = "surface '" + s.label + "': ";
    require(s.rho >= 0.0 && s.rho <= 1.0, tag + "rho must be in [0, 1]");
    const double lu = s.edge_u.norm();
    const double lv = s.edge_v.norm();
    require(lu > 0 && lv > 0, tag + "edges must have positive length");
    require(std::abs(dot(s.edge_u, s.edge_v)) <= 1e-9 * lu * lv, tag + "edges must be orthogonal");
  }
  for (const auto& o : occluders) {
    require(o.lo.x < o.hi.x && o.lo.y < o.hi.y && o.lo.z < o.hi.z,
            "occluder '" + o.label + "': min corner must be below max corner");
  }
  std::set<int> ids;
  for (const auto& u : units) {
    const std::string tag = "unit " + std::to_string(u.id) + ": ";
    require(u.id >= 1, tag + "id must be >= 1");
    require(ids.insert(u.id).second, tag + "duplicate id");
    require(room.contains(u.center), tag + "centre outside the room");
    require(u.lambert_n > 0, tag + "Lambertian order must be positive");
    require(u.emitter_power_w >= 0, tag + "power must be non-negative");
    require(u.grid >= 1 && u.emitter_spacing >= 0, tag + "bad emitter grid");
    require(u.tone.frequency_hz > 0 && u.tone.modulation_index > 0, tag + "bad tone");
  }
}

const LightUnit& Scene::unit(int id) const { return units.at(static_cast<size_t>(unit_index(id))); }

int Scene::unit_index(int id) const {
  for (size_t i = 0; i < units.size(); ++i) {
    if (units[i].id == id) return static_cast<int>(i);
  }
  throw std::out_of_range("no light unit with id " + std::to_string(id));
}

namespace {

std::vector<LightUnit> ceiling_units(const RoomBox& room) {
  // Numbered row by row along y: unit 1 over the (1, 1) corner, unit 8 over
  // (3, 7).
  const double xs[] = {1.0, 3.0};
  const double ys[] = {1.0, 3.0, 5.0, 7.0};
  std::vector<LightUnit> units;
  int id = 1;
  for (double y : ys) {
    for (double x : xs) {
      LightUnit u;
      u.id = id;
      u.center = {x, y, room.height};
      u.tone.frequency_hz = default_tone_hz(id);
      units.push_back(u);
      ++id;
    }
  }
  return units;
}

struct Opening {
  double s0, s1, t0, t1;  // extents along edge_u and edge_v, metres
  std::string label;
};

// Adds a wall split into rectangular panels around the openings; the
// openings themselves are added as rho = 0 surfaces.
void add_wall(Scene& scene, Point3 origin, Vec3 u, Vec3 v, double rho, const std::string& label,
              const std::vector<Opening>& openings = {}) {
  const double lu = u.norm();
  const double lv = v.norm();
  const Vec3 uh = u / lu;
  const Vec3 vh = v / lv;
  if (openings.empty()) {
    scene.surfaces.push_back({origin, u, v, rho, label});
    return;
  }
  std::set<double> ss{0.0, lu};
  std::set<double> ts{0.0, lv};
  for (const auto& o : openings) {
    ss.insert(o.s0);
    ss.insert(o.s1);
    ts.insert(o.t0);
    ts.insert(o.t1);
  }
  const std::vector<double> sv(ss.begin(), ss.end());
  const std::vector<double> tv(ts.begin(), ts.end());
  int panel = 0;
  for (size_t i = 0; i + 1 < sv.size(); ++i) {
    for (size_t j = 0; j + 1 < tv.size(); ++j) {
      const double sm = 0.5 * (sv[i] + sv[i + 1]);
      const double tm = 0.5 * (tv[j] + tv[j + 1]);
      const bool covered = std::any_of(openings.begin(), openings.end(), [&](const Opening& o) {
        return sm > o.s0 && sm < o.s1 && tm > o.t0 && tm < o.t1;
      });
      if (covered) continue;
      scene.surfaces.push_back({origin + uh * sv[i] + vh * tv[j], uh * (sv[i + 1] - sv[i]),
                                vh * (tv[j + 1] - tv[j]), rho,
                                label + "/" + std::to_string(panel++)});
    }
  }
  for (const auto& o : openings) {
    scene.surfaces.push_back(
        {origin + uh * o.s0 + vh * o.t0, uh * (o.s1 - o.s0), vh * (o.t1 - o.t0), 0.0, o.label});
  }
}

// Box standing on the floor: top face plus four sides, all facing outward.
void add_box(Scene& scene, Point3 lo, Point3 hi, double rho, const std::string& label) {
  const double dx = hi.x - lo.x;
  const double dy = hi.y - lo.y;
  const double dz = hi.z - lo.z;
  scene.surfaces.push_back({{lo.x, lo.y, hi.z}, {dx, 0, 0}, {0, dy, 0}, rho, label + "/top"});
  scene.surfaces.push_back({{lo.x, lo.y, lo.z}, {dx, 0, 0}, {0, 0, dz}, rho, label + "/-y"});
  scene.surfaces.push_back({{lo.x, hi.y, lo.z}, {0, 0, dz}, {dx, 0, 0}, rho, label + "/+y"});
  scene.surfaces.push_back({{lo.x, lo.y, lo.z}, {0, 0, dz}, {0, dy, 0}, rho, label + "/-x"});
  scene.surfaces.push_back({{hi.x, lo.y, lo.z}, {0, dy, 0}, {0, 0, dz}, rho, label + "/+x"});
}

}  // namespace

Scene build_room_a() {
  Scene s;
  const RoomBox& r = s.room;
  const double w = r.width, l = r.length, h = r.height;
  s.surfaces.push_back({{0, 0, 0}, {w, 0, 0}, {0, l, 0}, 0.3, "floor"});
  s.surfaces.push_back({{0, 0, h}, {0, l, 0}, {w, 0, 0}, 0.8, "ceiling"});
  s.surfaces.push_back({{0, 0, 0}, {0, l, 0}, {0, 0, h}, 0.8, "wall-x0"});
  s.surfaces.push_back({{w, 0, 0}, {0, 0, h}, {0, l, 0}, 0.8, "wall-x4"});
  s.surfaces.push_back({{0, 0, 0}, {0, 0, h}, {w, 0, 0}, 0.8, "wall-y0"});
  s.surfaces.push_back({{0, l, 0}, {w, 0, 0}, {0, 0, h}, 0.8, "wall-y8"});
  s.units = ceiling_units(r);
  return s;
}

Scene build_room_b() {
  Scene s;
  const RoomBox& r = s.room;
  const double w = r.width, l = r.length, h = r.height;
  s.surfaces.push_back({{0, 0, 0}, {w, 0, 0}, {0, l, 0}, 0.3, "floor"});
  s.surfaces.push_back({{0, 0, h}, {0, l, 0}, {w, 0, 0}, 0.8, "ceiling"});
  // Two large windows on x = 0; edge_u runs along y, edge_v along z.
  add_wall(s, {0, 0, 0}, {0, l, 0}, {0, 0, h}, 0.8, "wall-x0",
           {{1.0, 3.0, 1.0, 2.5, "window-1"}, {5.0, 7.0, 1.0, 2.5, "window-2"}});
  // Bookshelves and filing cabinets.
  add_wall(s, {w, 0, 0}, {0, 0, h}, {0, l, 0}, 0.4, "wall-x4");
  // Window and door on y = 0; edge_u runs along z, edge_v along x.
  add_wall(s, {0, 0, 0}, {0, 0, h}, {w, 0, 0}, 0.8, "wall-y0",
           {{1.0, 2.5, 0.5, 2.0, "window-3"}, {0.0, 2.1, 2.75, 3.75, "door"}});
  add_wall(s, {0, l, 0}, {w, 0, 0}, {0, 0, h}, 0.4, "wall-y8");

  add_box(s, {3.1, 5.0, 0.0}, {3.9, 6.2, 0.75}, 0.3, "desk-1");
  add_box(s, {3.1, 2.0, 0.0}, {3.9, 3.2, 0.75}, 0.3, "desk-2");
  add_box(s, {0.8, 3.6, 0.0}, {1.6, 4.6, 0.75}, 0.3, "table");
  add_box(s, {2.75, 5.4, 0.0}, {3.05, 5.7, 0.45}, 0.3, "chair-1");
  add_box(s, {2.75, 2.4, 0.0}, {3.05, 2.7, 0.45}, 0.3, "chair-2");

  // Cubicle partitions, 1.5 m high, lining the bookshelf wall.
  s.occluders.push_back({{2.60, 4.70, 0.0}, {2.65, 6.20, 1.5}, "cubicle-1/side"});
  s.occluders.push_back({{2.60, 4.70, 0.0}, {4.00, 4.75, 1.5}, "cubicle-1/front"});
  s.occluders.push_back({{2.60, 1.80, 0.0}, {2.65, 3.30, 1.5}, "cubicle-2/side"});
  s.occluders.push_back({{2.60, 1.75, 0.0}, {4.00, 1.80, 1.5}, "cubicle-2/front"});

  s.units = ceiling_units(r);
  return s;
}

std::vector<SurfaceElement> discretize(const Scene& scene, double element_size,
                                       const DiscretizeOptions& options) {
  if (!(element_size > 0.0)) throw std::domain_error("element size must be positive");
  std::vector<SurfaceElement> out;
  for (size_t si = 0; si < scene.surfaces.size(); ++si) {
    const ReflectingSurface& s = scene.surfaces[si];
    if (s.rho <= 0.0) continue;
    const double lu = s.edge_u.norm();
    const double lv = s.edge_v.norm();
    const Vec3 uh = s.edge_u / lu;
    const Vec3 vh = s.edge_v / lv;
    const int nu = std::max(1, static_cast<int>(std::ceil(lu / element_size - 1e-9)));
    const int nv = std::max(1, static_cast<int>(std::ceil(lv / element_size - 1e-9)));
    const Direction3 normal = s.normal();
    for (int i = 0; i < nu; ++i) {
      const double a0 = i * element_size;
      const double a1 = (i + 1 == nu) ? lu : std::min((i + 1) * element_size, lu);
      for (int j = 0; j < nv; ++j) {
        const double b0 = j * element_size;
        const double b1 = (j + 1 == nv) ? lv : std::min((j + 1) * element_size, lv);
        const Point3 c = s.origin + uh * (0.5 * (a0 + a1)) + vh * (0.5 * (b0 + b1));
        if (c.z < options.min_center_z) continue;
        out.push_back({c, normal, (a1 - a0) * (b1 - b0), s.rho, 1.0, static_cast<int>(si)});
      }
    }
  }
  return out;
}

VisibilityIndex::VisibilityIndex(const Scene& scene) : boxes_(scene.occluders) {
  for (const auto& s : scene.surfaces) {
    if (!on_room_boundary(s, scene.room)) blockers_.push_back(s);
  }
}

bool VisibilityIndex::visible(const Point3& p, const Point3& q) const {
  if (trivially_open()) return true;
  // Fixed argument order keeps the test exactly symmetric.
  const bool swap = std::tie(q.x, q.y, q.z) < std::tie(p.x, p.y, p.z);
  return swap ? !blocked(q, p) : !blocked(p, q);
}

bool VisibilityIndex::blocked(const Point3& p, const Point3& q) const {
  const Vec3 d = q - p;
  const double len = d.norm();
  if (len <= 0.0) return false;
  const double eps = 1e-9 / len;

  for (const auto& b : boxes_) {
    double t0 = eps;
    double t1 = 1.0 - eps;
    const double pa[3] = {p.x, p.y, p.z};
    const double da[3] = {d.x, d.y, d.z};
    const double lo[3] = {b.lo.x, b.lo.y, b.lo.z};
    const double hi[3] = {b.hi.x, b.hi.y, b.hi.z};
    bool miss = false;
    for (int a = 0; a < 3 && !miss; ++a) {
      if (std::abs(da[a]) < 1e-300) {
        miss = pa[a] <= lo[a] || pa[a] >= hi[a];
      } else {
        double ta = (lo[a] - pa[a]) / da[a];
        double tb = (hi[a] - pa[a]) / da[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        miss = t0 >= t1;
      }
    }
    if (!miss) return true;
  }

  for (const auto& s : blockers_) {
    const Vec3 n = cross(s.edge_u, s.edge_v);
    const double denom = dot(n, d);
    if (std::abs(denom) <= 1e-14 * n.norm() * len) continue;
    const double t = dot(n, s.origin - p) / denom;
    if (t <= eps || t >= 1.0 - eps) continue;
    const Vec3 r = p + d * t - s.origin;
    const double a = dot(r, s.edge_u) / s.edge_u.norm2();
    const double b = dot(r, s.edge_v) / s.edge_v.norm2();
    if (a > 1e-12 && a < 1.0 - 1e-12 && b > 1e-12 && b < 1.0 - 1e-12) return true;
  }
  return false;
}

bool visible(const Point3& p, const Point3& q, const Scene& scene) {
  return VisibilityIndex(scene).visible(p, q);
}

namespace {

template <typename Flip>
Scene mirrored(const Scene& scene, Flip flip, int axis) {
  Scene m = scene;
  auto flip_vec = [axis](Vec3 v) {
    if (axis == 0) v.x = -v.x;
    else v.y = -v.y;
    return v;
  };
  for (auto& s : m.surfaces) {
    s.origin = flip(s.origin);
    const Vec3 u = flip_vec(s.edge_u);
    s.edge_u = flip_vec(s.edge_v);
    s.edge_v = u;
  }
  for (auto& o : m.occluders) {
    const Point3 a = flip(o.lo);
    const Point3 b = flip(o.hi);
    o.lo = {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
    o.hi = {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
  }
  for (auto& u : m.units) u.center = flip(u.center);
  return m;
}

}  // namespace

Scene mirror_x(const Scene& scene) {
  const double w = scene.room.width;
  return mirrored(scene, [w](Point3 p) { return Point3{w - p.x, p.y, p.z}; }, 0);
}

Scene mirror_y(const Scene& scene) {
  const double l = scene.room.length;
  return mirrored(scene, [l](Point3 p) { return Point3{p.x, l - p.y, p.z}; }, 1);
}

}  // namespace owc

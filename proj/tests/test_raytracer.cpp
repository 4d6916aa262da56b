#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "owcsim/raytracer.hpp"
#include "support/oracles.hpp"

using namespace owc;
using namespace owc::testing;

namespace {

void expect_same_rays(const std::vector<std::vector<Arrival>>& got,
                      const std::vector<std::vector<Arrival>>& want) {
  const RayDiff d = compare_rays(got, want);
  EXPECT_TRUE(d.same_shape);
  EXPECT_LE(d.max_delay_err, 1e-12);
  EXPECT_LE(d.max_power_rel_err, 1e-12);
  EXPECT_GT(d.rays, 100u);
}

double unit_total(const ChannelMatrix& h, int u) {
  double s = 0;
  for (int p = 0; p < h.pixels; ++p) s += total_power(h.at(u, p));
  return s;
}

double order_total(const ChannelMatrix& h, int u, int order) {
  double s = 0;
  for (int p = 0; p < h.pixels; ++p) {
    for (const auto& a : h.at(u, p)) {
      if (a.order == order) s += a.power_w;
    }
  }
  return s;
}

}  // namespace

TEST(LambertOrder, Examples) {
  EXPECT_NEAR(lambert_order(60.0), 1.0, 1e-12);
  EXPECT_NEAR(lambert_order(70.0), 0.646, 0.005);
  EXPECT_NEAR(lambert_order(70.0), 0.65, 0.005);
  EXPECT_NEAR(lambert_order(45.0), 2.0, 1e-12);
  EXPECT_THROW(lambert_order(0.0), std::domain_error);
  EXPECT_THROW(lambert_order(90.0), std::domain_error);
}

TEST(LambertianIntensity, ValuesAndNormalization) {
  EXPECT_NEAR(lambertian_intensity(1.0, 1.0, 0.0), 1.0 / M_PI, 1e-15);
  EXPECT_NEAR(lambertian_intensity(1.0, 1.0, M_PI / 2), 0.0, 1e-15);
  for (double n : {0.65, 1.0, 2.0, 10.0, 50.0}) {
    for (double p : {1.0, 1.9, 17.1}) {
      // Composite Simpson over phi of I(phi) 2 pi sin(phi).
      const int m = 20000;
      const double h = (M_PI / 2) / m;
      double sum = 0;
      for (int i = 0; i <= m; ++i) {
        const double phi = i * h;
        const double w = (i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2);
        sum += w * lambertian_intensity(p, n, phi) * 2 * M_PI * std::sin(phi);
      }
      EXPECT_NEAR(sum * h / 3 / p, 1.0, 1e-6) << "n=" << n;
    }
  }
}

TEST(TotalPower, Sums) {
  EXPECT_EQ(total_power({}), 0.0);
  EXPECT_NEAR(total_power({{1e-9, 2e-6, 1, 0}, {2e-9, 3e-6, 1, 1}}), 5e-6, 1e-20);
}

TEST(Trace, ClosedFormLos) {
  Scene s = toy_room(1);
  ImagingReceiver rx;
  rx.position = {1.0, 1.0, 0.0};
  Tracer tracer(s, {}, {}, 0);
  const auto cells = tracer.trace_unit(0, rx);
  const double n = s.units[0].lambert_n;
  const double g = 1.7 * 1.7 / std::pow(std::sin(65.0 * M_PI / 180.0), 2);
  const double want = (n + 1) / (2 * M_PI) * 1.9 * rx.optics.entrance_area_m2 / 4.0 * 0.8778 * g;
  double got = 0;
  int rays = 0;
  for (const auto& c : cells) {
    for (const auto& a : c) {
      got += a.power_w;
      EXPECT_NEAR(a.delay_s, 2.0 / 299792458.0, 1e-18);
      ++rays;
    }
  }
  EXPECT_EQ(rays, 1);
  EXPECT_NEAR(got, want, 1e-12 * want);
}

TEST(Trace, OccluderBlocksLos) {
  Scene s = toy_room(3);
  s.occluders.push_back({{0.5, 0.5, 1.0}, {1.5, 1.5, 1.2}, "slab"});
  ImagingReceiver rx;
  rx.position = {1.0, 1.0, 0.5};
  Tracer tracer(s, {}, {}, 0);
  for (const auto& c : tracer.trace_unit(0, rx)) EXPECT_TRUE(c.empty());
}

TEST(Trace, MatchesBruteForceRayForRay) {
  for (bool occ : {false, true}) {
    const Scene s = toy_room(3, occ);
    const auto e1 = discretize(s, 1.0);
    const auto e2 = discretize(s, 1.0);
    ASSERT_LE(e1.size(), 50u);
    ImagingReceiver rx;
    rx.position = {1.3, 0.7, 0.8};
    const auto got = trace(s.units[0], s, rx, e1, e2);
    expect_same_rays(got, brute_force(s, rx, e1, e2));
  }
}

TEST(Trace, EnergyBounds) {
  for (const Scene& s : {toy_room(3), build_room_a()}) {
    Tracer tracer(s, discretize(s, 0.25), discretize(s, 0.5));
    double rho_max = 0;
    for (const auto& f : s.surfaces) rho_max = std::max(rho_max, f.rho);
    for (const Point3 pos : {Point3{1.0, 1.0, 0.5}, Point3{1.9, 1.9, 1.0}, Point3{0.2, 1.5, 0.1}}) {
      ImagingReceiver rx;
      rx.position = pos;
      const ChannelMatrix h = tracer.trace(rx);
      for (int u = 0; u < h.units(); ++u) {
        const double pu = s.units[static_cast<size_t>(u)].total_power_w();
        EXPECT_LE(order_total(h, u, 1), rho_max * pu);
        EXPECT_LE(order_total(h, u, 2), rho_max * rho_max * pu);
        EXPECT_LE(unit_total(h, u), pu);
      }
    }
  }
}

TEST(Trace, GridConvergence) {
  const Scene s = toy_room(3);
  ImagingReceiver rx;
  rx.position = {1.3, 0.7, 0.8};
  for (double h : {0.25, 0.2}) {
    Tracer coarse(s, discretize(s, h), discretize(s, h));
    Tracer fine(s, discretize(s, h / 2), discretize(s, h / 2));
    const ChannelMatrix a = coarse.trace(rx);
    const ChannelMatrix b = fine.trace(rx);
    EXPECT_NEAR(unit_total(a, 0) / unit_total(b, 0), 1.0, 0.05);
    // Per-order totals converge too once the elements are finer than the
    // receiver height above the floor.
    if (h > 0.2) continue;
    for (int order : {1, 2}) {
      EXPECT_NEAR(order_total(a, 0, order) / order_total(b, 0, order), 1.0, 0.05)
          << "h=" << h << " order " << order;
    }
  }
}

TEST(Trace, RoomAPointSymmetricPairs) {
  const Scene a = build_room_a();
  Tracer tracer(a);
  ImagingReceiver rx;
  rx.position = {2.0, 4.0, 1.0};
  const ChannelMatrix h = tracer.trace(rx);
  for (auto [p, q] : {std::pair{1, 8}, {2, 7}, {3, 6}, {4, 5}}) {
    const double tp = unit_total(h, a.unit_index(p));
    const double tq = unit_total(h, a.unit_index(q));
    EXPECT_NEAR(tp / tq, 1.0, 1e-9) << p << "," << q;
    for (int order : {0, 1, 2}) {
      EXPECT_NEAR(order_total(h, a.unit_index(p), order) / order_total(h, a.unit_index(q), order),
                  1.0, 1e-9);
    }
  }
}

namespace {

// Per-unit totals of `scene` at `pos` against those of its y-mirror at the
// mirrored position, paired by unit location.
double worst_mirror_ratio(const Scene& scene, const Point3& pos) {
  const Scene m = mirror_y(scene);
  ImagingReceiver rx, rxm;
  rx.position = pos;
  rxm.position = {pos.x, scene.room.length - pos.y, pos.z};
  const ChannelMatrix h = Tracer(scene).trace(rx);
  const ChannelMatrix hm = Tracer(m).trace(rxm);
  double worst = 0;
  for (int u = 0; u < h.units(); ++u) {
    const Point3 c = scene.units[static_cast<size_t>(u)].center;
    int partner = -1;
    for (size_t k = 0; k < m.units.size(); ++k) {
      const Point3 mc = m.units[k].center;
      if (std::abs(mc.x - c.x) < 1e-12 && std::abs(mc.y - (scene.room.length - c.y)) < 1e-12) {
        partner = static_cast<int>(k);
      }
    }
    EXPECT_GE(partner, 0);
    if (partner < 0) continue;
    worst = std::max(worst, std::abs(unit_total(hm, partner) / unit_total(h, u) - 1.0));
  }
  return worst;
}

}  // namespace

TEST(Trace, MirroredSceneGivesMirroredPowers) {
  // Room A's surfaces are whole multiples of the element sizes, so the
  // mirrored discretization is the mirror of the discretization.
  EXPECT_LT(worst_mirror_ratio(build_room_a(), {1.3, 2.2, 1.0}), 1e-9);
  // Room B's wall panels are not, and clipped edge cells land on the other
  // side after mirroring.
  EXPECT_LT(worst_mirror_ratio(build_room_b(), {3.0, 2.5, 1.0}), 0.02);
}

TEST(Trace, RemovingOccludersNeverLowersPower) {
  const Scene b = build_room_b();
  Scene open = b;
  open.occluders.clear();
  Tracer tb(b), to(open);
  for (const Point3 pos : {Point3{3.0, 5.5, 1.0}, Point3{2.0, 2.5, 1.0}, Point3{3.3, 2.0, 1.0}}) {
    ImagingReceiver rx;
    rx.position = pos;
    const ChannelMatrix hb = tb.trace(rx);
    const ChannelMatrix ho = to.trace(rx);
    int lower = 0;
    for (int u = 0; u < hb.units(); ++u) {
      for (int p = 0; p < hb.pixels; ++p) {
        const double with = total_power(hb.at(u, p));
        const double without = total_power(ho.at(u, p));
        if (without < with * (1 - 1e-12)) ++lower;
      }
    }
    EXPECT_EQ(lower, 0);
  }
}

TEST(Trace, Deterministic) {
  const Scene b = build_room_b();
  ImagingReceiver rx;
  rx.position = {2.2, 3.3, 1.0};
  setenv("OWC_SIM_THREADS", "1", 1);
  const ChannelMatrix one = Tracer(b).trace(rx);
  setenv("OWC_SIM_THREADS", "4", 1);
  const ChannelMatrix four = Tracer(b).trace(rx);
  unsetenv("OWC_SIM_THREADS");
  ASSERT_EQ(one.cells.size(), four.cells.size());
  for (size_t i = 0; i < one.cells.size(); ++i) {
    ASSERT_EQ(one.cells[i].size(), four.cells[i].size());
    for (size_t k = 0; k < one.cells[i].size(); ++k) {
      EXPECT_EQ(one.cells[i][k].delay_s, four.cells[i][k].delay_s);
      EXPECT_EQ(one.cells[i][k].power_w, four.cells[i][k].power_w);
    }
  }
}

TEST(Trace, ReceiverOutsideRoomThrows) {
  Tracer t(build_room_a(), TraceOptions{1.0, 1.0, 2, false});
  ImagingReceiver rx;
  rx.position = {5.0, 4.0, 1.0};
  EXPECT_THROW(t.trace(rx), std::invalid_argument);
}

TEST(Trace, FullResolutionElementCounts) {
  const Scene a = build_room_a();
  DiscretizeOptions d;
  d.min_center_z = a.comm_floor_z;
  EXPECT_EQ(discretize(a, TraceOptions::full_resolution().element_size_1st, d).size(), 32000u);
  EXPECT_EQ(discretize(a, TraceOptions::full_resolution().element_size_2nd, d).size(), 2000u);
}

#include "owcsim/link.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace owc {

namespace {

struct DelayMoments {
  double mean = 0.0;
  double spread = 0.0;
};

DelayMoments delay_moments(const std::vector<Arrival>& arrivals) {
  if (arrivals.empty()) throw std::domain_error("delay statistics need at least one arrival");
  // Work relative to the earliest arrival to keep the squares well scaled.
  double t0 = arrivals.front().delay_s;
  for (const auto& a : arrivals) t0 = std::min(t0, a.delay_s);
  double w = 0.0;
  double m = 0.0;
  for (const auto& a : arrivals) {
    const double p2 = a.power_w * a.power_w;
    w += p2;
    m += (a.delay_s - t0) * p2;
  }
  if (!(w > 0.0)) throw std::domain_error("delay statistics need non-zero power");
  m /= w;
  double v = 0.0;
  for (const auto& a : arrivals) {
    const double d = a.delay_s - t0 - m;
    v += d * d * a.power_w * a.power_w;
  }
  return {t0 + m, std::sqrt(v / w)};
}

}  // namespace

double mean_delay(const std::vector<Arrival>& arrivals) { return delay_moments(arrivals).mean; }

double delay_spread(const std::vector<Arrival>& arrivals) {
  return delay_moments(arrivals).spread;
}

EyePowers eye_powers(const std::vector<Arrival>& arrivals, double bit_rate) {
  if (arrivals.empty()) throw std::domain_error("eye_powers needs at least one arrival");
  if (!(bit_rate > 0.0)) throw std::domain_error("bit rate must be positive");
  double t0 = arrivals.front().delay_s;
  for (const auto& a : arrivals) t0 = std::min(t0, a.delay_s);
  const double tb = 1.0 / bit_rate;
  EyePowers e;
  for (const auto& a : arrivals) {
    if (a.delay_s - t0 < tb) {
      e.p_s1 += a.power_w;
    } else {
      e.p_s0 += a.power_w;
    }
  }
  return e;
}

double sinr(const EyePowers& eye, double responsivity, double sigma_dt, double interference) {
  const double denom = sigma_dt * sigma_dt + interference;
  if (!(denom > 0.0)) throw std::domain_error("sinr needs positive noise plus interference");
  const double open = std::max(0.0, eye.p_s1 - eye.p_s0);
  return responsivity * responsivity * open * open / denom;
}

double ber(double s) {
  if (s < 0.0) throw std::domain_error("sinr must be non-negative");
  return 0.5 * std::erfc(std::sqrt(s) / std::sqrt(2.0));
}

double sinr_for_ber(double target_ber) {
  if (!(target_ber > 0.0 && target_ber < 0.5)) {
    throw std::domain_error("target BER must lie in (0, 0.5)");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (ber(hi) > target_ber) hi *= 2.0;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (ber(mid) > target_ber) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double mrc_sinr(const std::vector<PixelLink>& pixels, double responsivity) {
  double s = 0.0;
  for (const auto& p : pixels) s += sinr(p.eye, responsivity, p.sigma_dt, p.interference);
  return s;
}

LinkContext make_link_context(const ChannelMatrix& channel, const HMatrix& h,
                              const ImagingReceiver& rx, const NoiseParams& noise) {
  LinkContext ctx;
  ctx.channel = &channel;
  ctx.h = &h;
  ctx.rx = &rx;
  ctx.sigma_dt = pixel_noise(h, rx, rx.electrical.data_bandwidth_hz, noise);
  return ctx;
}

double unit_sinr(const LinkContext& ctx, int unit_index, const std::vector<int>& serving,
                 const std::vector<int>& interferers, double bit_rate) {
  const double r = ctx.rx->electrical.responsivity;
  std::vector<PixelLink> links;
  for (int p : serving) {
    const auto& arrivals = ctx.channel->at(unit_index, p);
    if (arrivals.empty()) continue;
    PixelLink l;
    l.eye = eye_powers(arrivals, bit_rate);
    l.sigma_dt = ctx.sigma_dt[static_cast<size_t>(p)];
    for (int k : interferers) {
      if (k == unit_index) continue;
      const double a = r * ctx.h->at(p, k);
      l.interference += 0.5 * a * a;
    }
    links.push_back(l);
  }
  return mrc_sinr(links, r);
}

double max_rate(const LinkContext& ctx, int unit_index, const std::vector<int>& serving,
                const std::vector<int>& interferers, const LinkParams& params) {
  const double target = params.target_sinr > 0.0 ? params.target_sinr : sinr_for_ber(kTargetBer);
  const double step = params.rate_step_bps;
  const long steps = static_cast<long>(std::floor(ctx.rx->rate_cap_bps() / step + 1e-9));
  auto ok = [&](long k) {
    return unit_sinr(ctx, unit_index, serving, interferers, static_cast<double>(k) * step) >=
           target;
  };
  if (steps < 1 || serving.empty() || !ok(1)) return 0.0;
  if (ok(steps)) return static_cast<double>(steps) * step;
  long lo = 1;      // passes
  long hi = steps;  // fails
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (ok(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return static_cast<double>(lo) * step;
}

std::vector<int> LinkReport::active_ids() const {
  std::vector<int> out;
  for (const auto& u : units) {
    if (u.active) out.push_back(u.unit);
  }
  return out;
}

LinkReport evaluate_channel(const Scene& scene, const ChannelMatrix& channel,
                            const ImagingReceiver& rx, const LinkParams& params) {
  const HMatrix h = build_H(channel);
  const auto cnr = cnr_over_i(h, scene, rx, params.noise);
  const AssociationResult assoc = associate(h, cnr, params.threshold_db);
  const LinkContext ctx = make_link_context(channel, h, rx, params.noise);

  std::vector<int> active;
  for (int u = 0; u < h.units(); ++u) {
    if (assoc.active[static_cast<size_t>(u)]) active.push_back(u);
  }

  LinkReport report;
  report.position = rx.position;
  const double probe = params.rate_step_bps;
  for (int u = 0; u < h.units(); ++u) {
    UnitLink ul;
    ul.unit = h.unit_ids[static_cast<size_t>(u)];
    ul.active = assoc.active[static_cast<size_t>(u)];
    ul.serving = assoc.serving[static_cast<size_t>(u)];
    ul.sinr_db = std::numeric_limits<double>::quiet_NaN();
    if (ul.active) {
      ul.rate_bps = max_rate(ctx, u, ul.serving, active, params);
      const double s = unit_sinr(ctx, u, ul.serving, active, ul.rate_bps > 0 ? ul.rate_bps : probe);
      ul.sinr_db = 10.0 * std::log10(s);
    }
    report.units.push_back(ul);
  }
  for (const auto& ul : report.units) report.aggregate_bps += ul.rate_bps;
  return report;
}

LinkReport evaluate_position(const Tracer& tracer, const ImagingReceiver& rx,
                             const LinkParams& params) {
  const ChannelMatrix channel = tracer.trace(rx);
  return evaluate_channel(tracer.scene(), channel, rx, params);
}

}  // namespace owc

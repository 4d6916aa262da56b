#include "owcsim/scm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "owcsim/parallel.hpp"
#include "owcsim/rng.hpp"

namespace owc {

double HMatrix::pixel_total(int pixel) const {
  double s = 0.0;
  for (int u = 0; u < units(); ++u) s += at(pixel, u);
  return s;
}

HMatrix build_H(const ChannelMatrix& channel) {
  HMatrix h;
  h.pixels = channel.pixels;
  h.unit_ids = channel.unit_ids;
  h.pr.assign(static_cast<size_t>(h.pixels) * h.unit_ids.size(), 0.0);
  for (int u = 0; u < channel.units(); ++u) {
    for (int p = 0; p < channel.pixels; ++p) h.at(p, u) = total_power(channel.at(u, p));
  }
  return h;
}

double tone_current(double pr_w, double responsivity, double modulation_index) {
  return responsivity * pr_w * modulation_index;
}

std::complex<double> freq_response(const std::vector<Arrival>& arrivals, double f_hz) {
  double re = 0.0;
  double im = 0.0;
  const double w = 2.0 * kPi * f_hz;
  for (const auto& a : arrivals) {
    const double phase = w * a.delay_s;
    re += a.power_w * std::cos(phase);
    im -= a.power_w * std::sin(phase);
  }
  return {re, im};
}

namespace {

// |H(f)| with delays measured from t_ref; the magnitude does not depend on it.
double magnitude(const std::vector<Arrival>& arrivals, double f, double t_ref) {
  double re = 0.0;
  double im = 0.0;
  const double w = 2.0 * kPi * f;
  for (const auto& a : arrivals) {
    const double phase = w * (a.delay_s - t_ref);
    re += a.power_w * std::cos(phase);
    im -= a.power_w * std::sin(phase);
  }
  return std::hypot(re, im);
}

}  // namespace

double bandwidth_3db(const std::vector<Arrival>& arrivals) {
  const double dc = total_power(arrivals);
  if (!(dc > 0.0)) throw std::domain_error("bandwidth_3db needs non-zero total power");

  double t_ref = 0.0;
  for (const auto& a : arrivals) t_ref += a.power_w * a.delay_s;
  t_ref /= dc;
  // |d|H|/df| <= 2 pi sum P |t - t_ref|, so |H| cannot reach the half-power
  // level within (|H| - level) / slope of the current frequency.
  double slope = 0.0;
  for (const auto& a : arrivals) slope += a.power_w * std::abs(a.delay_s - t_ref);
  slope *= 2.0 * kPi;
  if (!(slope > 0.0)) return kFlatBandwidth;

  const double level = dc / std::sqrt(2.0);
  const double resolution = 1e6;
  double lo = 0.0;
  double f = 0.0;
  double mag = dc;
  while (true) {
    const double step = std::max(resolution, (mag - level) / slope);
    lo = f;
    f += step;
    if (f > kBandwidthSearchLimitHz) return kFlatBandwidth;
    mag = magnitude(arrivals, f, t_ref);
    if (mag <= level) break;
  }
  double hi = f;
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    if (magnitude(arrivals, mid, t_ref) <= level) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

NoiseBudget noise_sigma(double pixel_area_cm2, double pr_w, double bw_hz,
                        const NoiseParams& params) {
  if (pixel_area_cm2 < 0 || pr_w < 0 || bw_hz < 0) {
    throw std::domain_error("noise inputs must be non-negative");
  }
  NoiseBudget n;
  n.sigma_bn = std::sqrt(2.0 * kElectronCharge * pixel_area_cm2 *
                         params.background_current_density * bw_hz);
  n.sigma_s = std::sqrt(2.0 * kElectronCharge * params.responsivity * pr_w * bw_hz);
  n.sigma_pr = params.preamp_density * std::sqrt(bw_hz);
  n.sigma_t = std::sqrt(n.sigma_bn * n.sigma_bn + n.sigma_s * n.sigma_s + n.sigma_pr * n.sigma_pr);
  return n;
}

std::vector<double> pixel_noise(const HMatrix& h, const ImagingReceiver& rx, double bw_hz,
                                const NoiseParams& params) {
  NoiseParams p = params;
  p.responsivity = rx.electrical.responsivity;
  const double area_cm2 = rx.grid.pixel_area_m2() * 1e4;
  std::vector<double> out(static_cast<size_t>(h.pixels));
  for (int n = 0; n < h.pixels; ++n) {
    out[static_cast<size_t>(n)] = noise_sigma(area_cm2, h.pixel_total(n), bw_hz, p).sigma_t;
  }
  return out;
}

GaussianFit fit_gaussian(const std::vector<double>& samples) {
  GaussianFit g;
  if (samples.empty()) return g;
  double sum = 0.0;
  for (double s : samples) sum += s;
  g.mean = sum / static_cast<double>(samples.size());
  if (samples.size() < 2) return g;
  double ss = 0.0;
  for (double s : samples) ss += (s - g.mean) * (s - g.mean);
  g.sigma = std::sqrt(ss / static_cast<double>(samples.size() - 1));
  return g;
}

std::vector<Point3> random_floor_positions(const Scene& scene, size_t count, uint64_t seed) {
  std::vector<Point3> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    const double x = uniform01(seed, 2 * static_cast<uint64_t>(i));
    const double y = uniform01(seed, 2 * static_cast<uint64_t>(i) + 1);
    out.push_back({x * scene.room.width, y * scene.room.length, scene.comm_floor_z});
  }
  return out;
}

ToneSamples sample_tone_currents(const Tracer& tracer, const ImagingReceiver& rx,
                                 const std::vector<Point3>& positions, int desired_unit,
                                 int interfering_unit) {
  const Scene& scene = tracer.scene();
  const int di = scene.unit_index(desired_unit);
  const int ii = scene.unit_index(interfering_unit);
  const double r = rx.electrical.responsivity;
  const double mi_d = scene.units[static_cast<size_t>(di)].tone.modulation_index;
  const double mi_i = scene.units[static_cast<size_t>(ii)].tone.modulation_index;

  ToneSamples s;
  s.positions = positions;
  const size_t n = positions.size();
  s.pixel.assign(n, -1);
  s.desired.assign(n, 0.0);
  s.undesired.assign(n, 0.0);
  s.pixel_power.assign(n, 0.0);
  parallel_for(n, [&](size_t k) {
    ImagingReceiver at = rx;
    at.position = positions[k];
    const auto d = tracer.trace_unit(di, at);
    const auto i = tracer.trace_unit(ii, at);
    int best = -1;
    double best_p = 0.0;
    for (size_t p = 0; p < d.size(); ++p) {
      const double pw = total_power(d[p]);
      if (pw > best_p) {
        best_p = pw;
        best = static_cast<int>(p);
      }
    }
    s.pixel[k] = best;
    if (best < 0) return;
    const double pi = total_power(i[static_cast<size_t>(best)]);
    s.desired[k] = tone_current(best_p, r, mi_d);
    s.undesired[k] = tone_current(pi, r, mi_i);
    s.pixel_power[k] = best_p + pi;
  });
  return s;
}

ToneFits fit_tone_distributions(const ToneSamples& samples) {
  return {fit_gaussian(samples.desired), fit_gaussian(samples.undesired)};
}

ToneFits fit_tone_distributions(const Tracer& tracer, const ImagingReceiver& rx,
                                const std::vector<Point3>& positions, int desired_unit,
                                int interfering_unit) {
  return fit_tone_distributions(
      sample_tone_currents(tracer, rx, positions, desired_unit, interfering_unit));
}

namespace {

void check_separable(const GaussianFit& ds, const GaussianFit& us) {
  if (!(ds.mean > us.mean)) {
    throw std::domain_error("optimal threshold needs m_ds > m_us");
  }
}

}  // namespace

double optimal_threshold(const GaussianFit& ds, const GaussianFit& us, double sigma_t) {
  check_separable(ds, us);
  // Equal densities: A z^2 - 2 B z + C = 0 with
  //   A = s2^2 - s1^2, B = s2^2 m1 - s1^2 m2,
  //   C = s2^2 m1^2 - s1^2 m2^2 - s1^2 s2^2 ln(s2^2 / s1^2),
  // and discriminant s1^2 s2^2 ((m2 - m1)^2 + A ln(s2^2 / s1^2)). The root
  // that tends to the midpoint as A -> 0 is (B + D) / A = C / (B - D); pick
  // the form without cancellation.
  const double m1 = us.mean;
  const double m2 = ds.mean;
  const double s1sq = us.sigma * us.sigma + sigma_t * sigma_t;
  const double s2sq = ds.sigma * ds.sigma + sigma_t * sigma_t;
  if (s1sq == 0.0 && s2sq == 0.0) return 0.5 * (m1 + m2);
  if (s1sq == 0.0 || s2sq == 0.0) {
    // One hypothesis is a point mass; any threshold strictly between the
    // means separates them perfectly.
    return 0.5 * (m1 + m2);
  }
  const double a = s2sq - s1sq;
  const double b = s2sq * m1 - s1sq * m2;
  const double log_ratio = std::log(s2sq / s1sq);
  const double dm = m2 - m1;
  const double d = std::sqrt(s1sq) * std::sqrt(s2sq) * std::sqrt(dm * dm + a * log_ratio);
  if (b > 0.0) return (b + d) / a;
  const double c = s2sq * m1 * m1 - s1sq * m2 * m2 - s1sq * s2sq * log_ratio;
  return c / (b - d);
}

double likelihood_ratio_root(const GaussianFit& ds, const GaussianFit& us, double sigma_t) {
  check_separable(ds, us);
  const double m1 = us.mean;
  const double m2 = ds.mean;
  const double s1sq = us.sigma * us.sigma + sigma_t * sigma_t;
  const double s2sq = ds.sigma * ds.sigma + sigma_t * sigma_t;
  if (s1sq == 0.0 || s2sq == 0.0) return 0.5 * (m1 + m2);
  const double half_log = 0.5 * std::log(s2sq / s1sq);
  // ln f(z|H2) - ln f(z|H1)
  auto llr = [&](double z) {
    return (z - m1) * (z - m1) / (2.0 * s1sq) - (z - m2) * (z - m2) / (2.0 * s2sq) - half_log;
  };
  double lo = m1;
  double hi = m2;
  const double width = m2 - m1;
  for (double k = 1.0; llr(hi) < 0.0; k *= 2.0) {
    lo = hi;
    hi = m2 + k * width;
    if (!std::isfinite(hi)) throw std::runtime_error("likelihood ratio root not bracketed");
  }
  for (double k = 1.0; llr(lo) > 0.0; k *= 2.0) {
    hi = lo;
    lo = m1 - k * width;
    if (!std::isfinite(lo)) throw std::runtime_error("likelihood ratio root not bracketed");
  }
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (llr(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(llr(lo)) <= std::abs(llr(hi)) ? lo : hi;
}

namespace {

// P(X > th) and P(X <= th) for X ~ N(m, s^2), each from its own tail.
void tails(double m, double s, double th, double& above, double& below) {
  if (s == 0.0) {
    above = th < m ? 1.0 : (th == m ? 0.5 : 0.0);
    below = 1.0 - above;
    return;
  }
  const double z = (th - m) / (s * std::sqrt(2.0));
  above = 0.5 * std::erfc(z);
  below = 0.5 * std::erfc(-z);
}

}  // namespace

DecisionProbabilities decision_probabilities(const GaussianFit& ds, const GaussianFit& us,
                                             double sigma_t, double threshold, int units) {
  if (units < 1) throw std::domain_error("need at least one unit");
  if (!std::isfinite(threshold)) throw std::domain_error("threshold must be finite");
  const double s2 = std::sqrt(ds.sigma * ds.sigma + sigma_t * sigma_t);
  const double s1 = std::sqrt(us.sigma * us.sigma + sigma_t * sigma_t);
  DecisionProbabilities p;
  double miss = 0.0;
  tails(ds.mean, s2, threshold, p.p_cds, miss);
  tails(us.mean, s1, threshold, p.p_fus, p.p_cus);
  const double others = units - 1;
  p.p_cd = p.p_cds * std::pow(p.p_cus, others);
  // 1 - (1 - miss) (1 - p_fus)^(M-1) without cancellation.
  double log_cd = std::log1p(-std::min(miss, 1.0));
  if (others > 0) log_cd += others * std::log1p(-std::min(p.p_fus, 1.0));
  p.p_wd = -std::expm1(log_cd);
  return p;
}

std::vector<double> cnr_over_i(const HMatrix& h, const std::vector<double>& sigma_t,
                               double responsivity,
                               const std::vector<double>& modulation_index) {
  const int m = h.units();
  if (static_cast<int>(sigma_t.size()) != h.pixels ||
      static_cast<int>(modulation_index.size()) != m) {
    throw std::invalid_argument("cnr_over_i: dimension mismatch");
  }
  std::vector<double> out(static_cast<size_t>(h.pixels) * static_cast<size_t>(m));
  std::vector<double> power(static_cast<size_t>(m));
  for (int n = 0; n < h.pixels; ++n) {
    for (int u = 0; u < m; ++u) {
      const double a = tone_current(h.at(n, u), responsivity, modulation_index[u]);
      power[u] = 0.5 * a * a;
    }
    const double noise = sigma_t[static_cast<size_t>(n)] * sigma_t[static_cast<size_t>(n)];
    for (int u = 0; u < m; ++u) {
      double interference = 0.0;
      for (int k = 0; k < m; ++k) {
        if (k != u) interference += power[k];
      }
      const double denom = noise + interference;
      double db;
      if (power[u] == 0.0) {
        db = -std::numeric_limits<double>::infinity();
      } else if (denom == 0.0) {
        db = std::numeric_limits<double>::infinity();
      } else {
        db = 10.0 * std::log10(power[u] / denom);
      }
      out[static_cast<size_t>(n) * m + u] = db;
    }
  }
  return out;
}

std::vector<double> cnr_over_i(const HMatrix& h, const Scene& scene, const ImagingReceiver& rx,
                               const NoiseParams& params) {
  std::vector<double> index;
  for (int id : h.unit_ids) index.push_back(scene.unit(id).tone.modulation_index);
  return cnr_over_i(h, pixel_noise(h, rx, params.bpf_bandwidth_hz, params),
                    rx.electrical.responsivity, index);
}

std::vector<int> AssociationResult::active_ids() const {
  std::vector<int> out;
  for (size_t u = 0; u < unit_ids.size(); ++u) {
    if (active[u]) out.push_back(unit_ids[u]);
  }
  return out;
}

AssociationResult associate(const HMatrix& h, const std::vector<double>& cnr_db,
                            double threshold_db) {
  const int m = h.units();
  if (cnr_db.size() != static_cast<size_t>(h.pixels) * static_cast<size_t>(m)) {
    throw std::invalid_argument("associate: dimension mismatch");
  }
  AssociationResult r;
  r.pixels = h.pixels;
  r.unit_ids = h.unit_ids;
  r.cnr_db = cnr_db;
  r.detected.assign(cnr_db.size(), false);
  r.active.assign(static_cast<size_t>(m), false);
  r.serving.assign(static_cast<size_t>(m), {});
  for (int n = 0; n < h.pixels; ++n) {
    for (int u = 0; u < m; ++u) {
      const size_t i = static_cast<size_t>(n) * m + u;
      if (cnr_db[i] > threshold_db) {
        r.detected[i] = true;
        r.active[u] = true;
        r.serving[u].push_back(n);
      }
    }
  }
  return r;
}

}  // namespace owc

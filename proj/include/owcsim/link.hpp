#pragma once

#include <vector>

#include "owcsim/raytracer.hpp"
#include "owcsim/receiver.hpp"
#include "owcsim/scm.hpp"

namespace owc {

// Power-squared weighted mean delay and RMS delay spread. Both throw
// std::domain_error when the arrivals carry no power.
double mean_delay(const std::vector<Arrival>& arrivals);
double delay_spread(const std::vector<Arrival>& arrivals);

struct EyePowers {
  double p_s1 = 0.0;
  double p_s0 = 0.0;
};

// Worst-case full-ISI split at the first arrival t0: rays in [t0, t0 + Tb)
// feed the logic-1 level, later rays leak into the next (logic-0) slot.
EyePowers eye_powers(const std::vector<Arrival>& arrivals, double bit_rate);

// R^2 (P_s1 - P_s0)^2 / (sigma_dt^2 + I); an eye that is closed
// (P_s1 <= P_s0) gives 0.
double sinr(const EyePowers& eye, double responsivity, double sigma_dt, double interference);

double ber(double sinr);

// SINR at which ber() equals target (bisection on the monotone ber curve).
double sinr_for_ber(double target_ber);

inline constexpr double kTargetBer = 1e-6;

struct PixelLink {
  EyePowers eye;
  double sigma_dt = 0.0;
  double interference = 0.0;  // A^2
};

double mrc_sinr(const std::vector<PixelLink>& pixels, double responsivity);

struct LinkParams {
  NoiseParams noise;
  double rate_step_bps = 10e6;
  double target_sinr = 0.0;  // 0 means sinr_for_ber(kTargetBer)
  double threshold_db = kAssociationThresholdDb;
};

// Inputs shared by the rate search of every unit at one receiver position.
struct LinkContext {
  const ChannelMatrix* channel = nullptr;
  const HMatrix* h = nullptr;
  const ImagingReceiver* rx = nullptr;
  std::vector<double> sigma_dt;  // per pixel, over the data bandwidth
};

LinkContext make_link_context(const ChannelMatrix& channel, const HMatrix& h,
                              const ImagingReceiver& rx, const NoiseParams& noise = {});

// MRC SINR of a unit at a bit rate, over its serving pixels, with the given
// units (indices) as interferers.
double unit_sinr(const LinkContext& ctx, int unit_index, const std::vector<int>& serving,
                 const std::vector<int>& interferers, double bit_rate);

// Largest multiple of the rate step, up to the receiver rate cap, whose MRC
// SINR meets the target. 0 when even one step fails.
double max_rate(const LinkContext& ctx, int unit_index, const std::vector<int>& serving,
                const std::vector<int>& interferers, const LinkParams& params = {});

struct UnitLink {
  int unit = 0;
  bool active = false;
  std::vector<int> serving;
  double rate_bps = 0.0;
  double sinr_db = 0.0;  // at the achieved rate (or the first probe rate); NaN if inactive
};

struct LinkReport {
  Point3 position;
  std::vector<UnitLink> units;
  double aggregate_bps = 0.0;

  std::vector<int> active_ids() const;
};

// trace -> H -> CNR/I -> association -> per-unit rate search, with the final
// active set as mutual interferers.
LinkReport evaluate_position(const Tracer& tracer, const ImagingReceiver& rx,
                             const LinkParams& params = {});

LinkReport evaluate_channel(const Scene& scene, const ChannelMatrix& channel,
                            const ImagingReceiver& rx, const LinkParams& params = {});

}  // namespace owc

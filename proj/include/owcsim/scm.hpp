#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "owcsim/raytracer.hpp"
#include "owcsim/receiver.hpp"
#include "owcsim/scene.hpp"

namespace owc {

inline constexpr double kElectronCharge = 1.602176634e-19;  // C

// Received tone powers Pr[n][m], pixel-major.
struct HMatrix {
  int pixels = 0;
  std::vector<int> unit_ids;
  std::vector<double> pr;

  int units() const { return static_cast<int>(unit_ids.size()); }
  double at(int pixel, int unit_index) const {
    return pr[static_cast<size_t>(pixel) * unit_ids.size() + unit_index];
  }
  double& at(int pixel, int unit_index) {
    return pr[static_cast<size_t>(pixel) * unit_ids.size() + unit_index];
  }
  // Sum over units at one pixel.
  double pixel_total(int pixel) const;
};

HMatrix build_H(const ChannelMatrix& channel);

// Peak tone current R * Pr * index; its electrical power is amplitude^2 / 2.
double tone_current(double pr_w, double responsivity, double modulation_index = 1.0);

std::complex<double> freq_response(const std::vector<Arrival>& arrivals, double f_hz);

// Returned by bandwidth_3db when |H(f)|^2 stays above half of |H(0)|^2 up
// to kBandwidthSearchLimitHz.
inline constexpr double kFlatBandwidth = std::numeric_limits<double>::infinity();
inline constexpr double kBandwidthSearchLimitHz = 20e9;

// Smallest f with |H(f)|^2 = |H(0)|^2 / 2, to 1 MHz. The first crossing is
// located by a scan on a 1 MHz grid and refined by bisection. Throws
// std::domain_error when the total power is zero.
double bandwidth_3db(const std::vector<Arrival>& arrivals);

struct NoiseParams {
  double background_current_density = 1e-3;  // A/cm^2
  double bpf_bandwidth_hz = 4e6;
  double preamp_density = 4.5e-12;           // A/sqrt(Hz)
  double responsivity = 0.4;                 // A/W
};

struct NoiseBudget {
  double sigma_bn = 0.0;
  double sigma_s = 0.0;
  double sigma_pr = 0.0;
  double sigma_t = 0.0;
};

NoiseBudget noise_sigma(double pixel_area_cm2, double pr_w, double bw_hz,
                        const NoiseParams& params = {});

// sigma_t for every pixel over bandwidth bw_hz, with signal shot noise driven
// by the total power the pixel receives from all units.
std::vector<double> pixel_noise(const HMatrix& h, const ImagingReceiver& rx, double bw_hz,
                                const NoiseParams& params = {});

struct GaussianFit {
  double mean = 0.0;
  double sigma = 0.0;
};

// Sample mean and sample standard deviation (n - 1 denominator; 0 for n < 2).
GaussianFit fit_gaussian(const std::vector<double>& samples);

// Uniform positions on the communication floor from a counter-based
// generator: position i depends only on (seed, i).
std::vector<Point3> random_floor_positions(const Scene& scene, size_t count, uint64_t seed);

struct ToneSamples {
  std::vector<Point3> positions;
  std::vector<int> pixel;          // best pixel for the desired unit, -1 if none
  std::vector<double> desired;     // a: desired tone current, A
  std::vector<double> undesired;   // b: undesired tone current at the same pixel, A
  std::vector<double> pixel_power; // total power at that pixel from both units, W
};

// Evaluates the desired and interfering tone currents at each position.
ToneSamples sample_tone_currents(const Tracer& tracer, const ImagingReceiver& rx,
                                 const std::vector<Point3>& positions, int desired_unit,
                                 int interfering_unit);

struct ToneFits {
  GaussianFit desired;
  GaussianFit undesired;
};

ToneFits fit_tone_distributions(const ToneSamples& samples);
ToneFits fit_tone_distributions(const Tracer& tracer, const ImagingReceiver& rx,
                                const std::vector<Point3>& positions, int desired_unit,
                                int interfering_unit);

// Equal-prior likelihood-ratio threshold between N(m_us, sigma_us^2 +
// sigma_t^2) and N(m_ds, sigma_ds^2 + sigma_t^2), in closed form. Throws
// std::domain_error unless m_ds > m_us.
double optimal_threshold(const GaussianFit& ds, const GaussianFit& us, double sigma_t);

// Same threshold found numerically: bisection on the log-likelihood ratio,
// bracketed by [m_us, m_ds] and widened outward when the root lies beyond.
double likelihood_ratio_root(const GaussianFit& ds, const GaussianFit& us, double sigma_t);

struct DecisionProbabilities {
  double p_cds = 0.0;  // desired tone above threshold
  double p_fus = 0.0;  // undesired tone above threshold
  double p_cus = 0.0;  // 1 - p_fus
  double p_cd = 0.0;   // p_cds * p_cus^(M-1)
  double p_wd = 0.0;   // 1 - p_cd
};

DecisionProbabilities decision_probabilities(const GaussianFit& ds, const GaussianFit& us,
                                             double sigma_t, double threshold, int units);

// CNR/I in dB for every (pixel, unit), pixel-major. Zero signal gives -inf.
std::vector<double> cnr_over_i(const HMatrix& h, const std::vector<double>& sigma_t,
                               double responsivity,
                               const std::vector<double>& modulation_index);

// Convenience: modulation indices from the scene units, noise from
// pixel_noise over the BPF bandwidth.
std::vector<double> cnr_over_i(const HMatrix& h, const Scene& scene, const ImagingReceiver& rx,
                               const NoiseParams& params = {});

inline constexpr double kAssociationThresholdDb = 13.6;

struct AssociationResult {
  int pixels = 0;
  std::vector<int> unit_ids;
  std::vector<double> cnr_db;          // pixel-major
  std::vector<bool> detected;          // pixel-major
  std::vector<bool> active;            // per unit
  std::vector<std::vector<int>> serving;  // per unit, ascending pixel index

  std::vector<int> active_ids() const;
};

AssociationResult associate(const HMatrix& h, const std::vector<double>& cnr_db,
                            double threshold_db = kAssociationThresholdDb);

}  // namespace owc

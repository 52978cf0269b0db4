#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace voltkey {

// Composition of the shared noise on one power-line domain: a residual of the
// fundamental plus odd-harmonic content, broadband background noise, random
// switching impulses, and a persistent appliance load with slow amplitude
// modulation. All components are reproducible from `seed`. `load_seed` pins
// the appliance identity (harmonic mix and phases) separately so two domains
// can share appliance behaviour while the rest of their noise stays
// independent; `load_window_seed` pins the modulation trajectory within that
// identity, so "same appliances, different moment" is expressible. Zero means
// derive from `seed` (resp. from `load_seed`).
struct DomainNoiseConfig {
  double fundamental_hz = 60.0;
  double residual_fundamental_amp = 0.25;
  std::vector<std::pair<int, double>> harmonic_amps = {
      {3, 0.12},   {5, 0.09},   {7, 0.07},   {9, 0.06},   {11, 0.05},
      {13, 0.04},  {15, 0.035}, {17, 0.03},  {19, 0.025}, {21, 0.022},
      {23, 0.02},  {25, 0.018}, {27, 0.016}, {29, 0.015}, {31, 0.014}};
  double background_noise_rms = 0.02;
  double background_bandwidth_hz = 500.0;
  double wideband_noise_rms = 0.012;
  double wideband_bandwidth_hz = 8000.0;
  double impulse_rate = 16.0;       // events per second
  double impulse_amp_min = 0.05;    // volts
  double impulse_amp_max = 0.24;
  double impulse_decay = 0.002;     // seconds, exponential tail
  double continuous_load_noise_rms = 0.024;
  double master_rate = 1e6;         // samples per second
  uint64_t seed = 1;
  uint64_t load_seed = 0;
  uint64_t load_window_seed = 0;
};

// Ground-truth waveform on the line, sampled at `rate` for `duration` seconds.
struct MasterSignal {
  std::vector<double> samples;  // volts
  double rate = 0.0;
  double duration = 0.0;
};

// One device's sampling front end. Oscillator skew offsets the real sample
// rate from nominal; the ADC quantizes after automatic gain selection.
struct AdcConfig {
  double nominal_rate = 85400.0;
  double skew_ppm = 0.0;           // actual = nominal * (1 + skew_ppm/1e6)
  double local_noise_rms = 0.002;  // volts, device-private
  int resolution_bits = 12;
  double full_scale = 3.3;         // volts
  std::vector<double> gain_levels = {1, 2, 4, 8, 16, 32};
  uint64_t seed = 2;
};

// What one device captured: quantized codes plus the sampling facts needed to
// interpret them later.
struct SignalTrace {
  std::vector<uint16_t> samples;
  double nominal_rate = 0.0;
  double actual_rate = 0.0;
  double start_offset = 0.0;  // seconds into the master window
  double gain_used = 1.0;
  int resolution_bits = 12;
};

// Renders the domain's noise waveform. Throws std::invalid_argument on
// non-positive duration/rate or negative amplitudes.
MasterSignal synth_master(const DomainNoiseConfig& config, double duration);

// Single-pole RC low-pass applied to a master signal, modelling the filtering
// a breaker panel inserts between two outlets on separate circuits.
MasterSignal apply_breaker_filter(const MasterSignal& in, double cutoff_hz);

// Samples the master through one device's front end: linear interpolation at
// the skewed sample instants, device-private Gaussian noise, automatic gain
// (smallest gain putting the analog peak-to-peak at >= 60% of full scale,
// ties toward lower gain), then quantization with rail clipping.
SignalTrace observe(const MasterSignal& master, const AdcConfig& adc,
                    double start_offset, size_t n_samples);

}  // namespace voltkey

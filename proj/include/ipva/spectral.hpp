#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ipva {

struct Spectrum {
  std::vector<double> omega;    // rad/s
  std::vector<double> density;  // one-sided, units^2 per rad/s
};

// Averaged periodogram: Hann-windowed, mean-removed segments with 50%
// overlap. The integral of the density over omega approximates the variance.
// Throws kTooShort when fewer than two segments fit.
Spectrum psd(std::span<const double> signal, double ts,
             std::size_t segment_length = 16384);

// Index of the largest density within [lo, hi] rad/s; returns -1 if empty.
long peak_index(const Spectrum& s, double lo, double hi);

// Mean density within [lo, hi] rad/s.
double band_mean(const Spectrum& s, double lo, double hi);

// Integral of the density over [lo, hi] rad/s (trapezoid on bins).
double band_power(const Spectrum& s, double lo, double hi);

// Columns omega, [omega / omega0,] density.
void write_spectrum_csv(const std::string& path, const Spectrum& s,
                        double omega0 = 0.0);

}  // namespace ipva

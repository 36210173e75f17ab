#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "psforge/stft.hpp"

namespace psforge {

/// Multi-resolution STFT regularizer on F0 contours.
///
/// For one resolution with magnitudes X (reference) and Xh (prediction),
/// each N frames by K bins,
///
///   L = 1/M * sum_{n} sum_{k=beta}^{K} |log X[n,k] - log Xh[n,k]|,
///   M = N * (K - beta + 1),
///
/// with 1-based bin index k, so beta = 3 skips DC and the first bin.
/// Magnitudes are floored at `floor` before the log. The multi-resolution
/// value is weight * mean over resolutions.
struct LossConfig {
  std::size_t beta = 3;
  std::vector<ResolutionSpec> resolutions = {{32, 32, 8}, {64, 64, 16}, {128, 128, 32}};
  double weight = 0.1;
  double floor = 1e-7;
};

/// Throws InvalidInput unless 1 <= beta <= min K, weight >= 0 and every
/// resolution satisfies 0 < hop <= window <= fft with a power-of-two fft.
void validate(const LossConfig& cfg);

double f0_stft_loss_from_magnitudes(const Matrix& reference, const Matrix& predicted,
                                    std::size_t beta, double floor = 1e-7);

double f0_stft_loss(std::span<const double> reference, std::span<const double> predicted,
                    const ResolutionSpec& res, std::size_t beta, double floor = 1e-7);

struct MultiResolutionLoss {
  double value = 0.0;
  std::vector<double> per_resolution;  // unweighted single-resolution losses
};

MultiResolutionLoss multires_f0_loss_detailed(std::span<const double> reference,
                                              std::span<const double> predicted,
                                              const LossConfig& cfg = {});

double multires_f0_loss(std::span<const double> reference, std::span<const double> predicted,
                        const LossConfig& cfg = {});

/// d loss / d predicted, one entry per frame. Subgradient zero where the two
/// log magnitudes coincide and where the predicted magnitude sits on the floor.
std::vector<double> multires_f0_loss_gradient(std::span<const double> reference,
                                              std::span<const double> predicted,
                                              const LossConfig& cfg = {});

}  // namespace psforge

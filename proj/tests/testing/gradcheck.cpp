#include "testing/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "testing/oracles.hpp"

namespace psforge::testing {
namespace {

struct Resolution {
  ResolutionSpec spec;
  Matrix reference;
  Matrix predicted;
  std::vector<std::vector<std::size_t>> frames_of;  // sample -> frames whose window reads it
};

double log_diff(const Matrix& ref, const Matrix& pred, std::size_t t, std::size_t k, double floor) {
  return std::log(std::max(pred(t, k), floor)) - std::log(std::max(ref(t, k), floor));
}

}  // namespace

GradientCheck check_loss_gradient(std::span<const double> reference,
                                  std::span<const double> predicted, const LossConfig& cfg,
                                  double h, double margin) {
  const std::size_t len = predicted.size();
  std::vector<double> index(len);
  for (std::size_t i = 0; i < len; ++i) index[i] = static_cast<double>(i);

  std::vector<Resolution> res;
  for (const auto& spec : cfg.resolutions) {
    Resolution r{spec, magnitude_for_sequence(reference, spec).magnitudes,
                 magnitude_for_sequence(predicted, spec).magnitudes,
                 std::vector<std::vector<std::size_t>>(len)};
    const auto padded = reflect_pad(index, spec.window_size / 2);
    for (std::size_t t = 0; t < r.predicted.rows(); ++t) {
      std::set<std::size_t> seen;
      for (std::size_t m = 0; m < spec.window_size; ++m) {
        seen.insert(static_cast<std::size_t>(padded[t * spec.hop_size + m]));
      }
      for (auto s : seen) r.frames_of[s].push_back(t);
    }
    res.push_back(std::move(r));
  }

  const auto grad = multires_f0_loss_gradient(reference, predicted, cfg);
  double scale = 0.0;
  for (double g : grad) scale = std::max(scale, std::abs(g));

  // Loss and stepped magnitudes for one perturbed copy.
  std::vector<double> x(predicted.begin(), predicted.end());
  auto evaluate = [&](std::vector<Matrix>& mags) {
    double sum = 0.0;
    mags.clear();
    for (const auto& r : res) {
      mags.push_back(magnitude_for_sequence(x, r.spec).magnitudes);
      sum += f0_stft_loss_from_magnitudes(r.reference, mags.back(), cfg.beta, cfg.floor);
    }
    return cfg.weight * sum / static_cast<double>(res.size());
  };

  GradientCheck out;
  std::vector<Matrix> up_mags;
  std::vector<Matrix> down_mags;
  for (std::size_t i = 0; i < len; ++i) {
    bool singular = false;
    for (const auto& r : res) {
      for (auto t : r.frames_of[i]) {
        for (std::size_t k = cfg.beta - 1; k < r.predicted.cols(); ++k) {
          singular |= r.predicted(t, k) < margin * h;
        }
      }
    }
    if (singular) {
      ++out.skipped_singular;
      continue;
    }

    const double keep = x[i];
    x[i] = keep + h;
    const double up = evaluate(up_mags);
    x[i] = keep - h;
    const double down = evaluate(down_mags);
    x[i] = keep;

    bool kink = false;
    for (std::size_t n = 0; n < res.size() && !kink; ++n) {
      for (auto t : res[n].frames_of[i]) {
        for (std::size_t k = cfg.beta - 1; k < res[n].predicted.cols(); ++k) {
          const double a = log_diff(res[n].reference, up_mags[n], t, k, cfg.floor);
          const double b = log_diff(res[n].reference, down_mags[n], t, k, cfg.floor);
          kink |= (a > 0.0) != (b > 0.0);
        }
      }
    }
    if (kink) {
      ++out.skipped_kink;
      continue;
    }

    const double err = std::abs(grad[i] - (up - down) / (2.0 * h));
    ++out.checked;
    const double rel = scale > 0.0 ? err / scale : err;
    if (rel > out.max_relative_error) {
      out.max_relative_error = rel;
      out.worst_index = i;
    }
  }
  return out;
}

}  // namespace psforge::testing

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "divfuse/error.hpp"
#include "divfuse/fusion.hpp"
#include "divfuse/rng.hpp"

namespace divfuse {

// Ground-truth sample generator for fusion tests and benchmarks.
struct SynthSpec {
  enum class Base { gaussian, mixture, lognormal };

  std::size_t n = 0;
  Base base = Base::gaussian;
  double mu = 0.0;
  double sigma = 1.0;
  std::vector<double> mixture_weights;
  std::vector<double> mixture_means;
  std::vector<double> mixture_sigmas;
  AffineParams distortion{1.0, 0.0}; // applied to every generated base value
  std::uint64_t seed = 0;

  void validate() const {
    if (n == 0) fail(errc::invalid_spec, "n must be > 0");
    if (base == Base::mixture) {
      if (mixture_weights.empty() ||
          mixture_weights.size() != mixture_means.size() ||
          mixture_weights.size() != mixture_sigmas.size())
        fail(errc::invalid_spec, "mixture component lists must be non-empty and aligned");
      double total = 0.0;
      for (double w : mixture_weights) {
        if (!(w >= 0.0)) fail(errc::invalid_spec, "mixture weights must be >= 0");
        total += w;
      }
      if (std::abs(total - 1.0) > 1e-12)
        fail(errc::invalid_spec, "mixture weights must sum to 1");
      for (double s : mixture_sigmas)
        if (!(s > 0.0)) fail(errc::invalid_spec, "sigma must be > 0");
    } else {
      if (!(sigma > 0.0)) fail(errc::invalid_spec, "sigma must be > 0");
    }
    if (!std::isfinite(distortion.scale) || distortion.scale == 0.0)
      fail(errc::invalid_spec, "distortion scale must be finite and nonzero");
    if (!std::isfinite(distortion.offset))
      fail(errc::invalid_spec, "distortion offset must be finite");
  }

  static SynthSpec gaussian_spec(std::size_t n, double mu, double sigma,
                                 AffineParams distortion, std::uint64_t seed) {
    SynthSpec s;
    s.n = n;
    s.base = Base::gaussian;
    s.mu = mu;
    s.sigma = sigma;
    s.distortion = distortion;
    s.seed = seed;
    return s;
  }

  static SynthSpec mixture_spec(std::size_t n, std::vector<double> weights,
                                std::vector<double> means, std::vector<double> sigmas,
                                AffineParams distortion, std::uint64_t seed) {
    SynthSpec s;
    s.n = n;
    s.base = Base::mixture;
    s.mixture_weights = std::move(weights);
    s.mixture_means = std::move(means);
    s.mixture_sigmas = std::move(sigmas);
    s.distortion = distortion;
    s.seed = seed;
    return s;
  }

  static SynthSpec lognormal_spec(std::size_t n, double mu, double sigma,
                                  AffineParams distortion, std::uint64_t seed) {
    SynthSpec s;
    s.n = n;
    s.base = Base::lognormal;
    s.mu = mu;
    s.sigma = sigma;
    s.distortion = distortion;
    s.seed = seed;
    return s;
  }
};

struct SynthDataset {
  std::vector<double> values;   // base samples mapped through the distortion
  AffineParams ground_truth;    // copy of the generating SynthSpec's distortion
};

inline SynthDataset synth_dataset(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SynthDataset out;
  out.ground_truth = spec.distortion;
  out.values.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    double base = 0.0;
    switch (spec.base) {
      case SynthSpec::Base::gaussian:
        base = rng.normal(spec.mu, spec.sigma);
        break;
      case SynthSpec::Base::lognormal:
        base = std::exp(rng.normal(spec.mu, spec.sigma));
        break;
      case SynthSpec::Base::mixture: {
        const double u = rng.uniform();
        double cum = 0.0;
        std::size_t pick = spec.mixture_weights.size() - 1;
        for (std::size_t c = 0; c < spec.mixture_weights.size(); ++c) {
          cum += spec.mixture_weights[c];
          if (u < cum) {
            pick = c;
            break;
          }
        }
        base = rng.normal(spec.mixture_means[pick], spec.mixture_sigmas[pick]);
        break;
      }
    }
    out.values.push_back(spec.distortion.scale * base + spec.distortion.offset);
  }
  return out;
}

} // namespace divfuse

#pragma once

// Analytic bounds on the eps-entropy of a randomly perturbed map, in bits.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"
#include "estimators.hpp"

namespace epsent {

namespace detail {

inline void check_bound_inputs(double h_eps, double p, double sigma, double scale) {
    if (!std::isfinite(h_eps)) throw domain_error("h_eps must be finite");
    if (!(p >= 0.0 && p <= 1.0)) throw domain_error("p must lie in [0,1]");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw domain_error("sigma must be finite and >= 0");
    if (!(scale > 0.0)) throw domain_error("partition diameter must be > 0");
    if (sigma == 0.0 && p > 0.0)
        throw consistency_error("p = " + std::to_string(p) + " > 0 is impossible with sigma = 0");
}

// p * log2(2 ceil(sigma / scale)); the term vanishes when p = 0.
inline double displacement_bits(double p, double sigma, double scale) {
    if (p == 0.0) return 0.0;
    return p * std::log2(2.0 * std::ceil(sigma / scale));
}

}  // namespace detail

/// Output noise: h + p log2(2 ceil(sigma/eps)) + H(p).
inline double output_noise_upper(double h_eps, double p, double sigma, double eps) {
    detail::check_bound_inputs(h_eps, p, sigma, eps);
    return h_eps + detail::displacement_bits(p, sigma, eps) + bernoulli_entropy(p);
}

/// Dynamical noise: h + delta + p log2(2 ceil(sigma/eps_n0)) + H(p).
inline double dynamical_noise_upper(double h_eps, double delta, double p, double sigma,
                                    double eps_n0) {
    detail::check_bound_inputs(h_eps, p, sigma, eps_n0);
    if (!(delta >= 0.0)) throw domain_error("delta must be >= 0");
    return h_eps + delta + detail::displacement_bits(p, sigma, eps_n0) + bernoulli_entropy(p);
}

/// Lower bound -log2 eps - log2 K for transition densities bounded by K.
/// Uniform noise on [-sigma, sigma] has K = 1/(2 sigma).
inline double kifer_lower(double eps, double density_bound) {
    if (!(eps > 0.0)) throw domain_error("eps must be > 0");
    if (!(density_bound > 0.0) || !std::isfinite(density_bound))
        throw domain_error("density bound K must be finite and > 0");
    return -std::log2(eps) - std::log2(density_bound);
}

/// Density bound of U[-sigma, sigma]; infinite for sigma = 0.
inline double uniform_density_bound(double sigma) {
    return sigma > 0.0 ? 1.0 / (2.0 * sigma) : std::numeric_limits<double>::infinity();
}

struct BoundInputs {
    double h_eps = 0.0;
    double delta = 0.0;
    double p = 0.0;
    double sigma = 0.0;
    double eps = 0.5;
    double eps_n0 = 0.5;
    double density_bound = std::numeric_limits<double>::infinity();  // K
};

struct BoundSet {
    double pure_noise_line = 0.0;  // -log2 eps
    double kifer_lower = 0.0;      // -inf when K is unbounded
    double output_upper = 0.0;
    double dynamical_upper = 0.0;
    double envelope_low = 0.0;
    double envelope_high = 0.0;
    bool consistent = true;        // envelope_low <= envelope_high (or a side is infinite)
    BoundInputs inputs;
};

/// The two-sided envelope. Coarse regime (eps >= sigma and eps_n0 > sigma):
/// upper = h + delta + p + H(p). Fine regime: upper = min(-log2 eps, dynamical
/// bound). The lower side is always the density-bound estimate.
inline BoundSet envelope(const BoundInputs& in) {
    BoundSet b;
    b.inputs = in;
    b.pure_noise_line = -std::log2(in.eps);
    b.kifer_lower = std::isfinite(in.density_bound) ? kifer_lower(in.eps, in.density_bound)
                                                    : -std::numeric_limits<double>::infinity();
    b.output_upper = output_noise_upper(in.h_eps, in.p, in.sigma, in.eps);
    b.dynamical_upper = dynamical_noise_upper(in.h_eps, in.delta, in.p, in.sigma, in.eps_n0);
    const bool coarse = in.eps >= in.sigma && in.eps_n0 > in.sigma;
    if (coarse)
        b.envelope_high = in.h_eps + in.delta + in.p + bernoulli_entropy(in.p);
    else
        b.envelope_high = std::min(b.pure_noise_line, b.dynamical_upper);
    b.envelope_low = b.kifer_lower;
    b.consistent = !(std::isfinite(b.envelope_low) && std::isfinite(b.envelope_high)) ||
                   b.envelope_low <= b.envelope_high;
    return b;
}

inline BoundSet envelope(double h_eps, double delta, double p, double sigma, double eps,
                         double eps_n0, double density_bound) {
    return envelope(BoundInputs{h_eps, delta, p, sigma, eps, eps_n0, density_bound});
}

}  // namespace epsent

#pragma once

// One-dimensional maps on [0,1] and their orbits under output or dynamical
// uniform noise.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "random.hpp"

namespace epsent {

enum class MapKind { logistic, doubling, tent };

inline std::string_view to_string(MapKind k) {
    switch (k) {
        case MapKind::logistic: return "logistic";
        case MapKind::doubling: return "doubling";
        case MapKind::tent: return "tent";
    }
    return "?";
}

inline MapKind parse_map_kind(std::string_view s) {
    if (s == "logistic") return MapKind::logistic;
    if (s == "doubling") return MapKind::doubling;
    if (s == "tent") return MapKind::tent;
    throw domain_error("unknown map kind '" + std::string(s) + "'");
}

/// A piecewise-monotone map of [0,1] into itself.
struct MapSpec {
    MapKind kind = MapKind::logistic;
    double lambda = 4.0;                 // logistic only
    std::vector<double> branch_points;   // monotonicity breakpoints, sorted, in (0,1)

    static MapSpec logistic(double lambda) {
        if (!(lambda > 0.0 && lambda <= 4.0))
            throw domain_error("logistic lambda must lie in (0,4], got " + std::to_string(lambda));
        return MapSpec{MapKind::logistic, lambda, {0.5}};
    }
    static MapSpec doubling() { return MapSpec{MapKind::doubling, 0.0, {0.5}}; }
    static MapSpec tent() { return MapSpec{MapKind::tent, 0.0, {0.5}}; }

    std::size_t branch_count() const { return branch_points.size() + 1; }
};

enum class NoiseMode { none, output, dynamical };
enum class Boundary { clamp, reflect };

inline std::string_view to_string(NoiseMode m) {
    switch (m) {
        case NoiseMode::none: return "none";
        case NoiseMode::output: return "output";
        case NoiseMode::dynamical: return "dynamical";
    }
    return "?";
}
inline std::string_view to_string(Boundary b) { return b == Boundary::clamp ? "clamp" : "reflect"; }

inline NoiseMode parse_noise_mode(std::string_view s) {
    if (s == "none") return NoiseMode::none;
    if (s == "output") return NoiseMode::output;
    if (s == "dynamical") return NoiseMode::dynamical;
    throw domain_error("unknown noise mode '" + std::string(s) + "'");
}
inline Boundary parse_boundary(std::string_view s) {
    if (s == "clamp") return Boundary::clamp;
    if (s == "reflect") return Boundary::reflect;
    throw domain_error("unknown boundary policy '" + std::string(s) + "'");
}

/// i.i.d. uniform noise on [-sigma, sigma] and how it acts on the orbit.
struct NoiseSpec {
    double sigma = 0.0;
    NoiseMode mode = NoiseMode::none;
    Boundary boundary = Boundary::reflect;
    std::uint64_t seed = 0;

    bool active() const { return mode != NoiseMode::none && sigma > 0.0; }
};

struct RealOrbit {
    std::vector<double> points;
    MapSpec map;
    NoiseSpec noise;
    double x0 = 0.0;
};

namespace detail {

inline void check_unit(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0))
        throw domain_error(std::string(what) + " must lie in [0,1], got " + std::to_string(x));
}

inline double apply_unchecked(const MapSpec& map, double x) {
    switch (map.kind) {
        case MapKind::logistic: {
            const double y = map.lambda * x * (1.0 - x);
            return y > 1.0 ? 1.0 : (y < 0.0 ? 0.0 : y);
        }
        case MapKind::doubling: {
            const double y = 2.0 * x;
            return y - std::floor(y);
        }
        case MapKind::tent: return 1.0 - std::abs(1.0 - 2.0 * x);
    }
    return x;
}

}  // namespace detail

/// f(x) for the given map. Doubling is 2x - floor(2x); tent is 1 - |1 - 2x|.
inline double iterate_map(const MapSpec& map, double x) {
    detail::check_unit(x, "x");
    return detail::apply_unchecked(map, x);
}

/// Folds an arbitrary real back into [0,1].
inline double apply_boundary(Boundary policy, double y) {
    if (y >= 0.0 && y <= 1.0) return y;
    if (policy == Boundary::clamp) return y < 0.0 ? 0.0 : 1.0;
    // Reflection at 0 and 1 is the period-2 fold x -> |((x + 1) mod 2) - 1|.
    double t = std::fmod(y, 2.0);
    if (t < 0.0) t += 2.0;
    return t <= 1.0 ? t : 2.0 - t;
}

/// Orbit stepper. For doubling and tent every iteration shifts one bit of the
/// 53-bit fixed-point state out at the top; a seeded fresh bit is shifted in at
/// the bottom so the floating-point orbit does not collapse onto 0 after ~53
/// steps. The result stays within 2^-53 of a true orbit of an initial condition
/// that agrees with x0 to double precision.
class MapStepper {
public:
    MapStepper(const MapSpec& map, std::uint64_t seed)
        : map_(map), bits_(mix_seed(seed, {stream::refresh_bits})) {}

    double operator()(double x) {
        switch (map_.kind) {
            case MapKind::logistic: return detail::apply_unchecked(map_, x);
            case MapKind::doubling: {
                std::uint64_t m = to_fixed(x);
                m = ((m << 1) & (kOne - 1)) | bits_.next();
                return from_fixed(m);
            }
            case MapKind::tent: {
                const std::uint64_t t = to_fixed(x) << 1;
                std::uint64_t m = t <= kOne ? t : 2 * kOne - t;
                if (m < kOne) m |= bits_.next();
                return from_fixed(m);
            }
        }
        return x;
    }

private:
    static constexpr std::uint64_t kOne = std::uint64_t{1} << 53;
    static std::uint64_t to_fixed(double x) { return static_cast<std::uint64_t>(x * 0x1.0p53); }
    static double from_fixed(std::uint64_t m) { return static_cast<double>(m) * 0x1.0p-53; }

    MapSpec map_;
    BitSource bits_;
};

/// Stream of w_n ~ U[-sigma, sigma].
class NoiseSource {
public:
    NoiseSource(double sigma, std::uint64_t seed)
        : sigma_(sigma), rng_(mix_seed(seed, {stream::noise})) {}

    double operator()() {
        if (sigma_ == 0.0) return 0.0;
        return sigma_ * (2.0 * uniform01(rng_) - 1.0);
    }

private:
    double sigma_;
    std::mt19937_64 rng_;
};

/// `count` i.i.d. draws from U[-sigma, sigma], reproducible from noise.seed.
inline std::vector<double> sample_noise(const NoiseSpec& noise, std::size_t count) {
    if (noise.sigma < 0.0) throw domain_error("sigma must be >= 0");
    std::vector<double> w(count, 0.0);
    if (noise.sigma == 0.0) return w;
    NoiseSource source(noise.sigma, noise.seed);
    for (auto& v : w) v = source();
    return w;
}

/// Orbit of x0 of the requested length.
///   none:      emits x_n, x_{n+1} = f(x_n)
///   output:    internal orbit unperturbed, emits boundary(x_n + w_n)
///   dynamical: emits x_n, x_{n+1} = boundary(f(x_n) + w_{n+1})
inline RealOrbit generate_orbit(const MapSpec& map, double x0, std::size_t length,
                                const NoiseSpec& noise) {
    detail::check_unit(x0, "x0");
    if (length < 1) throw domain_error("orbit length must be >= 1");
    if (noise.sigma < 0.0) throw domain_error("sigma must be >= 0");

    RealOrbit orbit{{}, map, noise, x0};
    orbit.points.resize(length);
    MapStepper step(map, noise.seed);
    NoiseSource w(noise.active() ? noise.sigma : 0.0, noise.seed);

    double x = x0;
    switch (noise.active() ? noise.mode : NoiseMode::none) {
        case NoiseMode::none:
            for (std::size_t i = 0; i < length; ++i) {
                orbit.points[i] = x;
                x = step(x);
            }
            break;
        case NoiseMode::output:
            for (std::size_t i = 0; i < length; ++i) {
                orbit.points[i] = apply_boundary(noise.boundary, x + w());
                x = step(x);
            }
            break;
        case NoiseMode::dynamical:
            for (std::size_t i = 0; i < length; ++i) {
                orbit.points[i] = x;
                x = apply_boundary(noise.boundary, step(x) + w());
            }
            break;
    }
    return orbit;
}

/// Seeded random x0 pushed through `burn_in` iterates of the (possibly noisy)
/// dynamics, so that the returned point samples the empirical invariant measure.
inline double burned_in_start(const MapSpec& map, const NoiseSpec& noise, std::size_t burn_in) {
    std::mt19937_64 rng(mix_seed(noise.seed, {stream::initial_condition}));
    double x = uniform01(rng);
    if (burn_in == 0) return x;
    NoiseSpec warm = noise;
    warm.seed = mix_seed(noise.seed, {stream::initial_condition, 1});
    if (warm.mode == NoiseMode::output) warm.mode = NoiseMode::none;  // output noise never feeds back
    const RealOrbit pre = generate_orbit(map, x, burn_in + 1, warm);
    return pre.points.back();
}

/// Debug dump: one point per line, 17 significant digits.
inline void write_orbit(std::ostream& out, const RealOrbit& orbit) {
    const auto old = out.precision(17);
    for (double x : orbit.points) out << x << '\n';
    out.precision(old);
}

}  // namespace epsent

#pragma once

// Closed-form checks run by `epsent selftest`: each row compares a library
// result with a value computed independently of it.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "compressor.hpp"
#include "dynamics.hpp"
#include "estimators.hpp"
#include "partition.hpp"
#include "random.hpp"

namespace epsent {

struct OracleCheck {
    std::string module;
    std::string name;
    double expected = 0.0;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

namespace detail {

inline SymbolicSequence iid_symbols(std::size_t n, std::size_t alphabet, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet - 1);
    SymbolicSequence s;
    s.alphabet_size = alphabet;
    s.symbols.resize(n);
    for (auto& x : s.symbols) x = static_cast<Symbol>(pick(rng));
    return s;
}

inline SymbolicSequence doubling_symbols(std::size_t n, std::uint64_t seed) {
    const MapSpec map = MapSpec::doubling();
    NoiseSpec none{0.0, NoiseMode::none, Boundary::reflect, seed};
    const double x0 = burned_in_start(map, none, 1000);
    return encode(generate_orbit(map, x0, n, none), Partition(2));
}

}  // namespace detail

/// Runs every check; takes a couple of seconds.
inline std::vector<OracleCheck> run_selftest() {
    std::vector<OracleCheck> rows;
    auto add = [&](std::string module, std::string name, double expected, double measured, double tol) {
        rows.push_back({std::move(module), std::move(name), expected, measured, tol,
                        std::abs(measured - expected) <= tol});
    };

    // dynamics
    add("dynamics", "logistic(4) at 0.5", 1.0, iterate_map(MapSpec::logistic(4.0), 0.5), 0.0);
    add("dynamics", "doubling at 0.3", 0.6, iterate_map(MapSpec::doubling(), 0.3), 1e-15);
    {
        NoiseSpec n{0.1, NoiseMode::output, Boundary::reflect, 7};
        const auto w = sample_noise(n, 1'000'000);
        double mean = 0.0;
        for (double v : w) mean += v;
        mean /= static_cast<double>(w.size());
        add("dynamics", "uniform noise mean, sigma 0.1", 0.0, mean, 3.0 * 0.1 / std::sqrt(3.0) / 1000.0);
    }

    // partition
    {
        const auto z = refine_cylinders(MapSpec::doubling(), Partition(2), 3);
        add("partition", "doubling N=2 n=3 cylinder count", 8.0, static_cast<double>(z.intervals.size()), 0.0);
        add("partition", "doubling N=2 n=3 diameter", 0.125, z.min_diameter, 1e-12);
        const auto l = refine_cylinders(MapSpec::logistic(4.0), Partition(2), 2);
        add("partition", "logistic N=2 n=2 diameter", (1.0 - std::sqrt(0.5)) / 2.0, l.min_diameter, 1e-12);
    }

    // estimators
    add("estimators", "H(0.5)", 1.0, bernoulli_entropy(0.5), 0.0);
    add("estimators", "H(0.1)", -0.1 * std::log2(0.1) - 0.9 * std::log2(0.9), bernoulli_entropy(0.1), 1e-12);
    {
        const auto bits = detail::iid_symbols(1'000'000, 2, 11);
        add("estimators", "block rate n=8, fair bits", 1.0, block_entropy_rate(bits, 8).value, 0.02);
        add("estimators", "conditional entropy n=4, fair bits", 1.0, conditional_entropy(bits, 4).value, 0.03);
        SymbolicSequence period2;
        period2.alphabet_size = 2;
        for (int i = 0; i < 1001; ++i) period2.symbols.push_back(static_cast<Symbol>(i % 2));
        add("estimators", "conditional entropy n=2, period 2", 0.0, conditional_entropy(period2, 2).value, 1e-9);
        add("estimators", "block rate n=4, period 2", 0.25, block_entropy_rate(period2, 4).value, 1e-9);
    }

    // compressor
    {
        const auto dbl = detail::doubling_symbols(1'000'000, 3);
        add("compressor", "lz78 rate, doubling N=2", 1.0, compress(dbl, Algorithm::lz78).report.rate, 0.1);
        const auto u16 = detail::iid_symbols(1'000'000, 16, 5);
        add("compressor", "lz78 rate, uniform N=16", 4.0, compress(u16, Algorithm::lz78).report.rate, 0.4);
        const auto bits = detail::iid_symbols(1'000'000, 2, 13);
        add("compressor", "castore rate, fair bits (within 0.5 bit)", 1.0,
            compress(bits, Algorithm::castore).report.rate, 0.5);
        const auto back = decode(compress(u16, Algorithm::castore).bytes);
        add("compressor", "castore round trip, N=16", 1.0, back.symbols == u16.symbols ? 1.0 : 0.0, 0.0);
    }

    // bounds
    add("bounds", "output bound h=1 p=0.1 sigma=0.1 eps=0.5",
        1.0 + 0.1 + bernoulli_entropy(0.1), output_noise_upper(1.0, 0.1, 0.1, 0.5), 1e-3);
    add("bounds", "output bound h=1 p=0.5 sigma=0.02 eps=0.004", 2.0 + 0.5 * std::log2(10.0),
        output_noise_upper(1.0, 0.5, 0.02, 0.004), 1e-3);
    add("bounds", "dynamical bound h=1 d=0.05 p=0.1 sigma=0.02 eps_n0=0.125",
        1.05 + 0.1 + bernoulli_entropy(0.1), dynamical_noise_upper(1.0, 0.05, 0.1, 0.02, 0.125), 1e-3);
    add("bounds", "dynamical bound h=1 d=0.05 p=0.9 sigma=0.1 eps_n0=0.01",
        1.05 + 0.9 * std::log2(20.0) + bernoulli_entropy(0.9),
        dynamical_noise_upper(1.0, 0.05, 0.9, 0.1, 0.01), 1e-3);
    add("bounds", "kifer eps=1/250 K=1", std::log2(250.0), kifer_lower(1.0 / 250.0, 1.0), 1e-9);
    add("bounds", "kifer eps=0.01 K=50", 1.0, kifer_lower(0.01, 50.0), 1e-9);
    return rows;
}

}  // namespace epsent

#pragma once

// Plug-in entropy estimators over empirical word frequencies, the Bernoulli
// entropy, the one-step cell mismatch probability p, and the n0 selector.
// Everything is in bits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "partition.hpp"
#include "random.hpp"

namespace epsent {

enum class EstimatorKind { plugin_block, conditional, compression };

struct EntropyEstimate {
    double value = 0.0;
    std::size_t block_len = 0;
    std::size_t sample_count = 0;
    EstimatorKind kind = EstimatorKind::plugin_block;
    bool undersampled = false;  // fewer than 10 * N^n windows
};

struct EstimatorOptions {
    bool bias_correction = false;  // Miller-Madow
};

/// -sum p_i log2 p_i with 0 log 0 = 0.
inline double partition_entropy(std::span<const double> freqs) {
    double sum = 0.0;
    for (double p : freqs) {
        if (!(p >= 0.0)) throw domain_error("frequencies must be nonnegative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw domain_error("frequencies must sum to 1, got " + std::to_string(sum));
    double h = 0.0;
    for (double p : freqs)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

namespace detail {

inline double entropy_of_counts(std::span<const std::uint64_t> counts, std::uint64_t total,
                                bool miller_madow) {
    const double m = static_cast<double>(total);
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / m;
        h -= p * std::log2(p);
    }
    if (miller_madow && total > 0)
        h += static_cast<double>(counts.size() - 1) / (2.0 * m * std::numbers::ln2);
    return h;
}

inline bool undersampled(const SymbolicSequence& seq, std::size_t n) {
    const std::uint64_t space = word_space(seq.alphabet_size, n);
    return space == 0 || static_cast<double>(seq.size()) < 10.0 * static_cast<double>(space);
}

}  // namespace detail

/// H_n: plug-in entropy of the sliding-window length-n word distribution.
inline double block_entropy(const SymbolicSequence& seq, std::size_t n, EstimatorOptions opt = {}) {
    if (n < 1) throw domain_error("block length must be >= 1");
    const auto words = count_words(seq.symbols, seq.alphabet_size, n);
    std::vector<std::uint64_t> counts;
    counts.reserve(words.size());
    for (const auto& w : words) counts.push_back(w.count);
    return detail::entropy_of_counts(counts, seq.size() - n + 1, opt.bias_correction);
}

/// H_n / n.
inline EntropyEstimate block_entropy_rate(const SymbolicSequence& seq, std::size_t n,
                                          EstimatorOptions opt = {}) {
    if (n < 1) throw domain_error("block length must be >= 1");
    EntropyEstimate e;
    e.value = block_entropy(seq, n, opt) / static_cast<double>(n);
    e.block_len = n;
    e.sample_count = seq.size() - n + 1;
    e.kind = EstimatorKind::plugin_block;
    e.undersampled = detail::undersampled(seq, n);
    return e;
}

/// H(T^-n Z | Z_n) = H_{n+1} - H_n, with H_n taken as the prefix marginal of
/// the same (n+1)-windows so the difference is an exact conditional entropy of
/// one empirical measure and lies in [0, log2 N].
inline EntropyEstimate conditional_entropy(const SymbolicSequence& seq, std::size_t n,
                                           EstimatorOptions opt = {}) {
    if (n < 1) throw domain_error("conditioning depth must be >= 1");
    const auto joint = count_words(seq.symbols, seq.alphabet_size, n + 1);
    std::vector<std::uint64_t> joint_counts;
    std::vector<std::uint64_t> prefix_counts;
    joint_counts.reserve(joint.size());
    const std::uint64_t base = seq.alphabet_size;
    for (std::size_t i = 0; i < joint.size(); ++i) {
        joint_counts.push_back(joint[i].count);
        // codes are sorted, so equal prefixes (code / N) are contiguous
        if (i > 0 && joint[i].code / base == joint[i - 1].code / base)
            prefix_counts.back() += joint[i].count;
        else
            prefix_counts.push_back(joint[i].count);
    }
    const std::uint64_t total = seq.size() - n;
    const double h_joint = detail::entropy_of_counts(joint_counts, total, opt.bias_correction);
    const double h_prefix = detail::entropy_of_counts(prefix_counts, total, opt.bias_correction);
    const double cap = std::log2(static_cast<double>(seq.alphabet_size));
    EntropyEstimate e;
    e.value = std::clamp(h_joint - h_prefix, 0.0, cap);
    e.block_len = n;
    e.sample_count = static_cast<std::size_t>(total);
    e.kind = EstimatorKind::conditional;
    e.undersampled = detail::undersampled(seq, n + 1);
    return e;
}

/// H(p) = -p log2 p - (1-p) log2(1-p).
inline double bernoulli_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw domain_error("probability must lie in [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

struct ProbabilityEstimate {
    double p = 0.0;
    double half_width = 0.0;  // 95% normal-approximation binomial interval
    std::size_t samples = 0;
};

/// Monte-Carlo estimate of P{cell(boundary(f(x) + w)) != cell(f(x))}. x runs
/// along a burned-in orbit: the perturbed chain for dynamical noise, the
/// unperturbed one otherwise.
inline ProbabilityEstimate estimate_p(const MapSpec& map, double partition_diam,
                                      const NoiseSpec& noise, std::size_t samples,
                                      std::size_t burn_in = 1000) {
    if (noise.sigma < 0.0) throw domain_error("sigma must be >= 0");
    if (samples < 1) throw domain_error("estimate_p needs at least one sample");
    const Partition partition = Partition::from_diameter(partition_diam);
    ProbabilityEstimate est;
    est.samples = samples;
    if (noise.sigma == 0.0) return est;

    NoiseSpec chain = noise;
    chain.seed = mix_seed(noise.seed, {stream::monte_carlo});
    const bool feeds_back = noise.mode == NoiseMode::dynamical;
    if (!feeds_back) chain.mode = NoiseMode::none;
    double x = burned_in_start(map, chain, burn_in);

    MapStepper step(map, chain.seed);
    NoiseSource w(noise.sigma, chain.seed);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double clean = step(x);
        const double noisy = apply_boundary(noise.boundary, clean + w());
        mismatches += partition.symbol_of(noisy) != partition.symbol_of(clean);
        x = feeds_back ? noisy : clean;
    }
    const double s = static_cast<double>(samples);
    est.p = static_cast<double>(mismatches) / s;
    est.half_width = 1.96 * std::sqrt(est.p * (1.0 - est.p) / s);
    return est;
}

/// Deepest block length with at least 50 expected samples per word:
/// floor(log_N(len / 50)), at least 1.
inline std::size_t default_max_depth(std::size_t alphabet, std::size_t length) {
    std::size_t depth = 0;
    double words = 1.0;
    while (words * static_cast<double>(alphabet) * 50.0 <= static_cast<double>(length)) {
        words *= static_cast<double>(alphabet);
        ++depth;
    }
    return depth < 1 ? 1 : depth;
}

struct N0Choice {
    std::size_t n0 = 1;
    std::size_t max_depth = 1;
    double gap = 0.0;        // |H(T^-n0 Z | Z_n0) - reference|
    double reference = 0.0;  // conditional entropy at max_depth, the proxy for h(eps)
    bool flagged = false;    // tail not flat: last two depths differ by more than delta
    std::vector<double> profile;  // conditional entropy at n = 1..max_depth
};

/// Smallest n0 <= max_depth whose conditional entropy is within delta of the
/// deepest estimable one. max_depth = 0 selects default_max_depth.
inline N0Choice choose_n0(const SymbolicSequence& seq, double delta, std::size_t max_depth = 0,
                          EstimatorOptions opt = {}) {
    if (!(delta > 0.0)) throw domain_error("delta must be > 0");
    N0Choice out;
    out.max_depth = max_depth ? max_depth : default_max_depth(seq.alphabet_size, seq.size());
    for (std::size_t n = 1; n <= out.max_depth; ++n)
        out.profile.push_back(conditional_entropy(seq, n, opt).value);
    out.reference = out.profile.back();
    out.n0 = out.max_depth;
    for (std::size_t n = 1; n <= out.max_depth; ++n) {
        if (std::abs(out.profile[n - 1] - out.reference) <= delta) {
            out.n0 = n;
            break;
        }
    }
    out.gap = std::abs(out.profile[out.n0 - 1] - out.reference);
    out.flagged = out.max_depth >= 2 &&
                  std::abs(out.profile[out.max_depth - 2] - out.reference) > delta;
    return out;
}

}  // namespace epsent

#pragma once

// Uniform partitions of [0,1], the symbolic coding of orbits, and the exact
// interval geometry of the refined partitions Z_n = Z v f^-1 Z v ... v f^-(n-1) Z.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"

namespace epsent {

using Symbol = std::uint16_t;

inline constexpr std::size_t kMaxAlphabet = 65535;

/// N equal cells [i/N, (i+1)/N), the last one closed at 1.
class Partition {
public:
    explicit Partition(std::size_t cell_count) : n_(cell_count) {
        if (cell_count < 2 || cell_count > kMaxAlphabet)
            throw domain_error("partition needs 2 <= N <= 65535 cells, got " +
                               std::to_string(cell_count));
    }

    /// Partition whose diameter is `eps`; 1/eps must be an integer.
    static Partition from_diameter(double eps) {
        if (!(eps > 0.0 && eps <= 0.5)) throw domain_error("partition diameter must lie in (0, 0.5]");
        const double inv = 1.0 / eps;
        const double n = std::round(inv);
        if (std::abs(n - inv) > 1e-9 * inv)
            throw domain_error("partition diameter must be 1/N for an integer N, got " +
                               std::to_string(eps));
        return Partition(static_cast<std::size_t>(n));
    }

    std::size_t cell_count() const { return n_; }
    double diameter() const { return 1.0 / static_cast<double>(n_); }

    Symbol symbol_of(double x) const {
        const double scaled = std::floor(x * static_cast<double>(n_));
        if (scaled <= 0.0) return 0;
        const auto cell = static_cast<std::size_t>(scaled);
        return static_cast<Symbol>(cell < n_ ? cell : n_ - 1);
    }

private:
    std::size_t n_;
};

struct SourceMeta {
    MapSpec map;
    NoiseSpec noise;
    double eps = 0.0;
};

struct SymbolicSequence {
    std::vector<Symbol> symbols;
    std::size_t alphabet_size = 2;
    SourceMeta source;

    std::size_t size() const { return symbols.size(); }
};

/// Symbolic orbit: symbol_j = min(floor(x_j N), N-1).
inline SymbolicSequence encode(const RealOrbit& orbit, const Partition& partition) {
    SymbolicSequence seq;
    seq.alphabet_size = partition.cell_count();
    seq.source = SourceMeta{orbit.map, orbit.noise, partition.diameter()};
    seq.symbols.resize(orbit.points.size());
    std::transform(orbit.points.begin(), orbit.points.end(), seq.symbols.begin(),
                   [&](double x) { return partition.symbol_of(x); });
    return seq;
}

// ---------------------------------------------------------------------------
// Cylinders

struct Cylinder {
    double left = 0.0;
    double right = 0.0;
    std::vector<Symbol> word;

    double length() const { return right - left; }
};

struct CylinderSet {
    std::size_t depth = 0;
    std::vector<Cylinder> intervals;  // sorted by left endpoint
    double min_diameter = 0.0;
};

inline constexpr std::size_t kDefaultCylinderCap = 1'000'000;

namespace detail {

// A monotone branch of the map with its exact inverse.
struct Branch {
    double lo;
    double hi;
    bool increasing;
    double (*forward)(const MapSpec&, double);
    double (*inverse)(const MapSpec&, double);
};

inline double logistic_left_inverse(const MapSpec& m, double y) {
    const double t = std::clamp(4.0 * y / m.lambda, 0.0, 1.0);
    // (1 - sqrt(1 - t)) / 2 without the cancellation near t = 0
    return t / (2.0 * (1.0 + std::sqrt(1.0 - t)));
}

inline std::vector<Branch> branches_of(const MapSpec& map) {
    switch (map.kind) {
        case MapKind::logistic:
            return {
                {0.0, 0.5, true, [](const MapSpec& m, double x) { return m.lambda * x * (1.0 - x); },
                 logistic_left_inverse},
                {0.5, 1.0, false, [](const MapSpec& m, double x) { return m.lambda * x * (1.0 - x); },
                 [](const MapSpec& m, double y) { return 1.0 - logistic_left_inverse(m, y); }},
            };
        case MapKind::doubling:
            return {
                {0.0, 0.5, true, [](const MapSpec&, double x) { return 2.0 * x; },
                 [](const MapSpec&, double y) { return 0.5 * y; }},
                {0.5, 1.0, true, [](const MapSpec&, double x) { return 2.0 * x - 1.0; },
                 [](const MapSpec&, double y) { return 0.5 * (y + 1.0); }},
            };
        case MapKind::tent:
            return {
                {0.0, 0.5, true, [](const MapSpec&, double x) { return 2.0 * x; },
                 [](const MapSpec&, double y) { return 0.5 * y; }},
                {0.5, 1.0, false, [](const MapSpec&, double x) { return 2.0 - 2.0 * x; },
                 [](const MapSpec&, double y) { return 1.0 - 0.5 * y; }},
            };
    }
    return {};
}

}  // namespace detail

/// Exact interval decomposition of Z_n. Built as Z_{k+1} = Z v f^-1(Z_k): each
/// cell is cut into monotone branch pieces and the intervals of Z_k that meet
/// a piece's image are pulled back through the branch inverse. Touching
/// intervals carrying the same word are merged.
inline CylinderSet refine_cylinders(const MapSpec& map, const Partition& partition, std::size_t n,
                                    std::size_t cap = kDefaultCylinderCap) {
    if (n < 1) throw domain_error("cylinder depth must be >= 1");
    const std::size_t cells = partition.cell_count();
    const double bound = static_cast<double>(cells) *
                         std::pow(static_cast<double>(map.branch_count()), static_cast<double>(n));
    if (bound > static_cast<double>(cap))
        throw resource_error("cylinder count bound N*branches^n = " + std::to_string(bound) +
                             " exceeds the cap of " + std::to_string(cap) + " intervals");

    const auto branches = detail::branches_of(map);
    const double nd = static_cast<double>(cells);

    std::vector<Cylinder> level;
    level.reserve(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const double right = i + 1 == cells ? 1.0 : static_cast<double>(i + 1) / nd;
        level.push_back({static_cast<double>(i) / nd, right, {static_cast<Symbol>(i)}});
    }

    for (std::size_t depth = 1; depth < n; ++depth) {
        std::vector<Cylinder> next;
        for (std::size_t i = 0; i < cells; ++i) {
            const double cell_lo = static_cast<double>(i) / nd;
            const double cell_hi = i + 1 == cells ? 1.0 : static_cast<double>(i + 1) / nd;
            for (const auto& b : branches) {
                const double l = std::max(cell_lo, b.lo);
                const double r = std::min(cell_hi, b.hi);
                if (!(r > l)) continue;
                const double fl = b.forward(map, l);
                const double fr = b.forward(map, r);
                const double lo = b.increasing ? fl : fr;
                const double hi = b.increasing ? fr : fl;
                // first interval of Z_k whose right end exceeds lo
                auto it = std::upper_bound(level.begin(), level.end(), lo,
                                           [](double v, const Cylinder& c) { return v < c.right; });
                for (; it != level.end() && it->left < hi; ++it) {
                    const double ya = std::max(it->left, lo);
                    const double yb = std::min(it->right, hi);
                    if (!(yb > ya)) continue;
                    // pin endpoints that coincide with the piece image to the piece ends
                    double xa = ya == lo ? (b.increasing ? l : r) : b.inverse(map, ya);
                    double xb = yb == hi ? (b.increasing ? r : l) : b.inverse(map, yb);
                    if (xa > xb) std::swap(xa, xb);
                    xa = std::clamp(xa, l, r);
                    xb = std::clamp(xb, l, r);
                    if (!(xb > xa)) continue;
                    Cylinder c{xa, xb, {}};
                    c.word.reserve(depth + 1);
                    c.word.push_back(static_cast<Symbol>(i));
                    c.word.insert(c.word.end(), it->word.begin(), it->word.end());
                    next.push_back(std::move(c));
                }
            }
        }
        std::sort(next.begin(), next.end(),
                  [](const Cylinder& a, const Cylinder& b) { return a.left < b.left; });
        std::vector<Cylinder> merged;
        merged.reserve(next.size());
        for (auto& c : next) {
            if (!merged.empty() && merged.back().word == c.word &&
                std::abs(merged.back().right - c.left) <= 1e-14) {
                merged.back().right = c.right;
            } else {
                merged.push_back(std::move(c));
            }
        }
        level = std::move(merged);
    }

    CylinderSet out;
    out.depth = n;
    out.min_diameter = std::numeric_limits<double>::infinity();
    for (const auto& c : level) out.min_diameter = std::min(out.min_diameter, c.length());
    out.intervals = std::move(level);
    return out;
}

/// Fallback estimate of the smallest cylinder diameter at depth n from data:
/// orbit points are sorted, and the smallest gap between consecutive
/// word-change points (midpoints between neighbours with different length-n
/// words) is reported. Meant for map kinds without closed-form inverses.
inline double empirical_min_diameter(const RealOrbit& orbit, const Partition& partition,
                                     std::size_t n) {
    if (n < 1) throw domain_error("cylinder depth must be >= 1");
    const auto& pts = orbit.points;
    if (pts.size() < n + 1) throw domain_error("orbit shorter than cylinder depth");
    const std::size_t count = pts.size() - n + 1;
    std::vector<std::pair<double, std::uint64_t>> tagged(count);
    for (std::size_t j = 0; j < count; ++j) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::size_t t = 0; t < n; ++t) {
            h ^= partition.symbol_of(pts[j + t]);
            h *= 0x100000001b3ULL;
        }
        tagged[j] = {pts[j], h};
    }
    std::sort(tagged.begin(), tagged.end());
    double best = std::numeric_limits<double>::infinity();
    double last_change = 0.0;
    for (std::size_t j = 1; j < count; ++j) {
        if (tagged[j].second != tagged[j - 1].second) {
            const double at = 0.5 * (tagged[j].first + tagged[j - 1].first);
            best = std::min(best, at - last_change);
            last_change = at;
        }
    }
    return std::min(best, 1.0 - last_change);
}

/// Debug dump with columns left,right,word (word symbols joined by '.').
inline void write_cylinders_csv(std::ostream& out, const CylinderSet& set) {
    const auto old = out.precision(17);
    out << "left,right,word\n";
    for (const auto& c : set.intervals) {
        out << c.left << ',' << c.right << ',';
        for (std::size_t i = 0; i < c.word.size(); ++i) out << (i ? "." : "") << c.word[i];
        out << '\n';
    }
    out.precision(old);
}

// ---------------------------------------------------------------------------
// Word statistics

/// Number of length-`block_len` words over an N-letter alphabet, or 0 when it
/// does not fit in 64 bits.
inline std::uint64_t word_space(std::size_t alphabet, std::size_t block_len) {
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < block_len; ++i) {
        if (total > std::numeric_limits<std::uint64_t>::max() / alphabet) return 0;
        total *= alphabet;
    }
    return total;
}

struct WordCount {
    std::uint64_t code;  // base-N value of the word, first symbol most significant
    std::uint64_t count;
};

/// Sliding-window counts of every length-`block_len` word that occurs,
/// sorted by code.
inline std::vector<WordCount> count_words(std::span<const Symbol> symbols, std::size_t alphabet,
                                          std::size_t block_len) {
    if (block_len < 1) throw domain_error("block length must be >= 1");
    if (symbols.size() < block_len)
        throw domain_error("sequence of length " + std::to_string(symbols.size()) +
                           " is shorter than block length " + std::to_string(block_len));
    const std::uint64_t space = word_space(alphabet, block_len);
    if (space == 0) throw domain_error("block length too large: N^n overflows 64 bits");

    const std::size_t windows = symbols.size() - block_len + 1;
    const std::uint64_t top = space / alphabet;  // weight of the leading symbol
    std::uint64_t code = 0;
    for (std::size_t i = 0; i + 1 < block_len; ++i) code = code * alphabet + symbols[i];

    std::vector<WordCount> out;
    constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 22;
    if (space <= kDenseLimit && space <= 4 * static_cast<std::uint64_t>(windows) + 1024) {
        std::vector<std::uint64_t> dense(space, 0);
        for (std::size_t i = block_len - 1; i < symbols.size(); ++i) {
            code = code * alphabet + symbols[i];
            ++dense[code];
            code %= top;
        }
        for (std::uint64_t c = 0; c < space; ++c)
            if (dense[c]) out.push_back({c, dense[c]});
        return out;
    }
    std::vector<std::uint64_t> codes;
    codes.reserve(windows);
    for (std::size_t i = block_len - 1; i < symbols.size(); ++i) {
        code = code * alphabet + symbols[i];
        codes.push_back(code);
        code %= top;
    }
    std::sort(codes.begin(), codes.end());
    for (std::size_t i = 0; i < codes.size();) {
        std::size_t j = i;
        while (j < codes.size() && codes[j] == codes[i]) ++j;
        out.push_back({codes[i], static_cast<std::uint64_t>(j - i)});
        i = j;
    }
    return out;
}

struct WordFrequency {
    std::vector<Symbol> word;
    double frequency;
};

struct FrequencyTable {
    std::size_t alphabet_size = 0;
    std::size_t block_len = 0;
    std::size_t sample_count = 0;
    std::vector<WordFrequency> entries;  // lexicographic word order

    std::vector<double> probabilities() const {
        std::vector<double> p;
        p.reserve(entries.size());
        for (const auto& e : entries) p.push_back(e.frequency);
        return p;
    }
};

/// Empirical frequencies of all length-`block_len` words, normalised by the
/// number of windows (len - block_len + 1).
inline FrequencyTable empirical_cell_frequencies(const SymbolicSequence& seq, std::size_t block_len) {
    const auto counts = count_words(seq.symbols, seq.alphabet_size, block_len);
    FrequencyTable table;
    table.alphabet_size = seq.alphabet_size;
    table.block_len = block_len;
    table.sample_count = seq.size() - block_len + 1;
    const double total = static_cast<double>(table.sample_count);
    table.entries.reserve(counts.size());
    for (const auto& wc : counts) {
        std::vector<Symbol> word(block_len);
        std::uint64_t c = wc.code;
        for (std::size_t i = block_len; i-- > 0;) {
            word[i] = static_cast<Symbol>(c % seq.alphabet_size);
            c /= seq.alphabet_size;
        }
        table.entries.push_back({std::move(word), static_cast<double>(wc.count) / total});
    }
    return table;
}

}  // namespace epsent

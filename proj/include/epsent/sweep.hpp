#pragma once

// The (sigma, eps) grid experiment: one perturbed orbit per cell, its
// compression and block-entropy rates, the mismatch probability, and the bound
// envelope evaluated against an unperturbed companion run.

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bounds.hpp"
#include "compressor.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "partition.hpp"
#include "random.hpp"

namespace epsent {

/// N in {2, 3, 4, 6, 8, 12, 16, 24, 32, 64, 125, 250}: eps from 0.5 down to 1/250.
inline std::vector<std::size_t> default_cell_grid() { return {2, 3, 4, 6, 8, 12, 16, 24, 32, 64, 125, 250}; }

struct GridConfig {
    MapSpec map = MapSpec::logistic(4.0);
    NoiseMode mode = NoiseMode::dynamical;
    Boundary boundary = Boundary::reflect;
    std::vector<double> sigmas{0.5, 0.1, 0.02, 0.01, 0.001};
    std::vector<std::size_t> cells = default_cell_grid();
    std::size_t orbit_len = 1'000'000;
    std::size_t burn_in = 1000;
    std::uint64_t master_seed = 1;
    std::size_t workers = 1;
    Algorithm algorithm = Algorithm::lz78;
    EstimatorOptions estimator;
    std::size_t max_depth = 0;  // 0: default_max_depth per N
    double delta = 0.05;
    std::size_t p_samples = 100'000;
    std::size_t cylinder_cap = kDefaultCylinderCap;
    double flat_slope = 0.15;
    double noise_slope = 0.85;
};

inline void validate(const GridConfig& c) {
    if (c.map.kind == MapKind::logistic && !(c.map.lambda > 0.0 && c.map.lambda <= 4.0))
        throw config_error("lambda", "must lie in (0,4]");
    if (c.sigmas.empty()) throw config_error("sigma", "at least one value required");
    for (double s : c.sigmas)
        if (!(s >= 0.0) || !std::isfinite(s)) throw config_error("sigma", "values must be finite and >= 0");
    if (c.cells.empty()) throw config_error("n_list", "at least one cell count required");
    for (auto n : c.cells)
        if (n < 2 || n > kMaxAlphabet) throw config_error("n_list", "cell counts must lie in [2, 65535]");
    if (c.orbit_len < 1000) throw config_error("length", "must be >= 1000");
    if (c.workers < 1) throw config_error("workers", "must be >= 1");
    if (!(c.delta > 0.0)) throw config_error("delta", "must be > 0");
    if (c.p_samples < 10'000) throw config_error("p_samples", "must be >= 10000");
    if (!(c.flat_slope >= 0.0)) throw config_error("flat_slope", "must be >= 0");
    if (!(c.noise_slope > c.flat_slope)) throw config_error("noise_slope", "must exceed flat_slope");
}

struct CurvePoint {
    double eps = 0.0;
    std::size_t n_cells = 0;
    double compression_rate = 0.0;
    double baseline_rate = 0.0;  // compression rate of the unperturbed companion
    double block_rate = 0.0;
    double cond_entropy_at_n0 = 0.0;
    std::size_t n0 = 1;
    ProbabilityEstimate p;
    BoundSet bounds;
    double upper_bound = 0.0;  // bound matching the noise mode
    std::uint64_t cell_seed = 0;
    bool above_upper = false;  // compression rate exceeds envelope_high (flag only)
    bool below_lower = false;
    std::string error;         // nonempty when the cell failed
};

struct EntropyCurve {
    double sigma = 0.0;
    std::vector<CurvePoint> points;  // decreasing eps
    std::size_t orbit_len = 0;
    MapSpec map;
    NoiseMode mode = NoiseMode::dynamical;
    Boundary boundary = Boundary::reflect;
    std::uint64_t master_seed = 0;
};

inline constexpr std::uint64_t kCompanionTag = 0xC0C0C0C0ULL;

/// Seed of grid cell (sigma_index, eps_index); part of the reproducibility contract.
inline std::uint64_t cell_seed(std::uint64_t master, std::size_t sigma_index, std::size_t eps_index) {
    return mix_seed(master, {sigma_index, eps_index});
}

/// Seed of the unperturbed companion run at eps_index.
inline std::uint64_t companion_seed(std::uint64_t master, std::size_t eps_index) {
    return mix_seed(master, {kCompanionTag, eps_index});
}

/// Runs fn(i) for i in [0, count) on up to `workers` threads. fn must not throw.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) fn(i);
        });
}

/// What the bounds need from the sigma = 0 run at one eps.
struct CompanionStats {
    double h_eps = 0.0;  // compression rate of the unperturbed orbit
    N0Choice n0;
    double eps_n0 = 0.0;
    std::string error;
};

namespace detail {

inline SymbolicSequence cell_sequence(const GridConfig& c, double sigma, NoiseMode mode,
                                      std::size_t n_cells, std::uint64_t seed) {
    NoiseSpec noise{sigma, mode, c.boundary, seed};
    const double x0 = burned_in_start(c.map, noise, c.burn_in);
    return encode(generate_orbit(c.map, x0, c.orbit_len, noise), Partition(n_cells));
}

inline CompanionStats run_companion(const GridConfig& c, std::size_t eps_index) {
    CompanionStats out;
    try {
        const std::size_t n_cells = c.cells[eps_index];
        const auto seq = cell_sequence(c, 0.0, NoiseMode::none, n_cells,
                                       companion_seed(c.master_seed, eps_index));
        out.h_eps = compress(seq, c.algorithm).report.rate;
        out.n0 = choose_n0(seq, c.delta, c.max_depth, c.estimator);
        try {
            out.eps_n0 = refine_cylinders(c.map, Partition(n_cells), out.n0.n0, c.cylinder_cap).min_diameter;
        } catch (const resource_error&) {
            NoiseSpec none{0.0, NoiseMode::none, c.boundary, companion_seed(c.master_seed, eps_index)};
            const double x0 = burned_in_start(c.map, none, c.burn_in);
            out.eps_n0 = empirical_min_diameter(generate_orbit(c.map, x0, c.orbit_len, none),
                                                Partition(n_cells), out.n0.n0);
        }
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

inline CurvePoint run_cell(const GridConfig& c, std::size_t sigma_index, std::size_t eps_index,
                           const CompanionStats& comp) {
    CurvePoint pt;
    pt.n_cells = c.cells[eps_index];
    pt.eps = 1.0 / static_cast<double>(pt.n_cells);
    pt.cell_seed = cell_seed(c.master_seed, sigma_index, eps_index);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    try {
        if (!comp.error.empty()) throw std::runtime_error("companion run failed: " + comp.error);
        const double sigma = c.sigmas[sigma_index];
        const auto seq = cell_sequence(c, sigma, c.mode, pt.n_cells, pt.cell_seed);
        pt.compression_rate = compress(seq, c.algorithm).report.rate;
        pt.baseline_rate = comp.h_eps;
        const std::size_t depth = c.max_depth ? c.max_depth : default_max_depth(pt.n_cells, c.orbit_len);
        pt.block_rate = block_entropy_rate(seq, depth, c.estimator).value;
        pt.n0 = comp.n0.n0;
        pt.cond_entropy_at_n0 = conditional_entropy(seq, pt.n0, c.estimator).value;
        NoiseSpec noise{sigma, c.mode, c.boundary, pt.cell_seed};
        pt.p = estimate_p(c.map, pt.eps, noise, c.p_samples, c.burn_in);
        const double p = sigma > 0.0 && c.mode != NoiseMode::none ? pt.p.p : 0.0;
        pt.bounds = envelope(BoundInputs{comp.h_eps, comp.n0.gap, p, sigma, pt.eps, comp.eps_n0,
                                         uniform_density_bound(sigma)});
        pt.upper_bound = c.mode == NoiseMode::dynamical ? pt.bounds.dynamical_upper : pt.bounds.output_upper;
        pt.above_upper = pt.compression_rate > pt.bounds.envelope_high;
        pt.below_lower = pt.compression_rate < pt.bounds.envelope_low;
    } catch (const std::exception& e) {
        pt.error = e.what();
        pt.compression_rate = pt.baseline_rate = pt.block_rate = pt.cond_entropy_at_n0 = nan;
        pt.p.p = pt.p.half_width = nan;
        pt.upper_bound = nan;
        pt.bounds.pure_noise_line = -std::log2(pt.eps);
        pt.bounds.kifer_lower = pt.bounds.envelope_low = pt.bounds.envelope_high = nan;
    }
    return pt;
}

}  // namespace detail

/// Runs every (sigma, eps) cell. Results are ordered by grid index, never by
/// completion order, so any worker count gives identical output.
inline std::vector<EntropyCurve> run_grid(const GridConfig& config) {
    validate(config);
    const std::size_t n_eps = config.cells.size();
    const std::size_t n_sigma = config.sigmas.size();

    std::vector<CompanionStats> companions(n_eps);
    parallel_for(n_eps, config.workers,
                 [&](std::size_t j) { companions[j] = detail::run_companion(config, j); });

    std::vector<CurvePoint> cells(n_sigma * n_eps);
    parallel_for(cells.size(), config.workers, [&](std::size_t t) {
        const std::size_t i = t / n_eps, j = t % n_eps;
        cells[t] = detail::run_cell(config, i, j, companions[j]);
    });

    std::vector<EntropyCurve> curves(n_sigma);
    for (std::size_t i = 0; i < n_sigma; ++i) {
        auto& curve = curves[i];
        curve.sigma = config.sigmas[i];
        curve.orbit_len = config.orbit_len;
        curve.map = config.map;
        curve.mode = config.mode;
        curve.boundary = config.boundary;
        curve.master_seed = config.master_seed;
        for (std::size_t j = 0; j < n_eps; ++j) curve.points.push_back(std::move(cells[i * n_eps + j]));
        std::stable_sort(curve.points.begin(), curve.points.end(),
                         [](const CurvePoint& a, const CurvePoint& b) { return a.eps > b.eps; });
    }
    return curves;
}

// ---------------------------------------------------------------------------
// Noise-level detection

enum class DetectionStatus { detected, plateau_only, noise_only, undetermined };

inline std::string_view to_string(DetectionStatus s) {
    switch (s) {
        case DetectionStatus::detected: return "detected";
        case DetectionStatus::plateau_only: return "plateau_only";
        case DetectionStatus::noise_only: return "noise_only";
        case DetectionStatus::undetermined: return "undetermined";
    }
    return "?";
}

struct SigmaDetection {
    double eps1 = std::numeric_limits<double>::quiet_NaN();  // plateau edge
    double eps2 = std::numeric_limits<double>::quiet_NaN();  // noise-regime edge
    DetectionStatus status = DetectionStatus::undetermined;

    double estimate() const { return std::sqrt(eps1 * eps2); }
};

struct RatePoint {
    double eps;
    double rate;
    double baseline = std::numeric_limits<double>::quiet_NaN();  // unperturbed rate, if known
};

/// Local slopes d rate / d log2(1/eps) by central differences (one-sided at
/// the ends) on points sorted by decreasing eps.
inline std::vector<double> local_slopes(const std::vector<RatePoint>& pts) {
    const std::size_t n = pts.size();
    std::vector<double> s(n, 0.0);
    if (n < 2) return s;
    auto x = [&](std::size_t i) { return -std::log2(pts[i].eps); };
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1;
        const std::size_t b = i + 1 == n ? n - 1 : i + 1;
        s[i] = (pts[b].rate - pts[a].rate) / (x(b) - x(a));
    }
    return s;
}

/// eps1 is the smallest eps whose local slope is below flat_slope; eps2 is the
/// largest eps whose local slope exceeds noise_slope. When every point carries
/// a baseline, flatness is judged on rate - baseline, so a rate that merely
/// tracks the unperturbed estimate counts as flat.
inline SigmaDetection detect_sigma(std::vector<RatePoint> pts, double flat_slope = 0.15,
                                   double noise_slope = 0.85) {
    SigmaDetection d;
    pts.erase(std::remove_if(pts.begin(), pts.end(), [](const RatePoint& p) { return !std::isfinite(p.rate); }),
              pts.end());
    if (pts.size() < 4) return d;
    std::sort(pts.begin(), pts.end(), [](const RatePoint& a, const RatePoint& b) { return a.eps > b.eps; });
    const std::size_t n = pts.size();
    const bool with_baseline =
        std::all_of(pts.begin(), pts.end(), [](const RatePoint& p) { return std::isfinite(p.baseline); });

    auto excess = pts;
    if (with_baseline)
        for (auto& p : excess) p.rate -= p.baseline;
    const auto flat_s = local_slopes(excess);
    const auto steep_s = local_slopes(pts);

    std::size_t flat_end = 0;  // one past the last flat point
    for (std::size_t i = 0; i < n; ++i)
        if (flat_s[i] < flat_slope) flat_end = i + 1;
    std::size_t steep_begin = n;  // first steep point
    for (std::size_t i = n; i-- > 0;)
        if (steep_s[i] > noise_slope) steep_begin = i;

    const bool plateau = flat_end > 0;
    const bool noise = steep_begin < n;
    if (plateau) d.eps1 = pts[flat_end - 1].eps;
    if (noise) d.eps2 = pts[steep_begin].eps;
    if (plateau && noise && d.eps2 < d.eps1)
        d.status = DetectionStatus::detected;
    else if (plateau && !noise)
        d.status = DetectionStatus::plateau_only;
    else if (noise && !plateau)
        d.status = DetectionStatus::noise_only;
    return d;
}

inline SigmaDetection detect_sigma(const EntropyCurve& curve, double flat_slope = 0.15,
                                   double noise_slope = 0.85) {
    std::vector<RatePoint> pts;
    for (const auto& p : curve.points) pts.push_back({p.eps, p.compression_rate, p.baseline_rate});
    return detect_sigma(std::move(pts), flat_slope, noise_slope);
}

// ---------------------------------------------------------------------------
// Output files

inline constexpr const char* kCsvHeader =
    "sigma,eps,n_cells,orbit_len,compression_rate_bits,block_rate_bits,cond_entropy_bits,n0,p_hat,"
    "p_halfwidth,pure_noise_line,kifer_lower,upper_bound,envelope_low,envelope_high,cell_seed,"
    "baseline_rate_bits";

namespace detail {
inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}
}  // namespace detail

/// One row per cell, sorted by sigma then eps, both descending.
inline void write_csv(std::ostream& out, const std::vector<EntropyCurve>& curves) {
    out << kCsvHeader << '\n';
    std::vector<const EntropyCurve*> order;
    for (const auto& c : curves) order.push_back(&c);
    std::stable_sort(order.begin(), order.end(),
                     [](const EntropyCurve* a, const EntropyCurve* b) { return a->sigma > b->sigma; });
    using detail::fmt9;
    for (const EntropyCurve* c : order) {
        auto pts = c->points;
        std::stable_sort(pts.begin(), pts.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.eps > b.eps; });
        for (const auto& p : pts) {
            out << fmt9(c->sigma) << ',' << fmt9(p.eps) << ',' << p.n_cells << ',' << c->orbit_len << ','
                << fmt9(p.compression_rate) << ',' << fmt9(p.block_rate) << ',' << fmt9(p.cond_entropy_at_n0)
                << ',' << p.n0 << ',' << fmt9(p.p.p) << ',' << fmt9(p.p.half_width) << ','
                << fmt9(p.bounds.pure_noise_line) << ',' << fmt9(p.bounds.kifer_lower) << ','
                << fmt9(p.upper_bound) << ',' << fmt9(p.bounds.envelope_low) << ','
                << fmt9(p.bounds.envelope_high) << ',' << p.cell_seed << ',' << fmt9(p.baseline_rate) << '\n';
        }
    }
}

inline void emit_csv(const std::vector<EntropyCurve>& curves, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_csv(out, curves);
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

/// gnuplot data: index 0 is the -log2(eps) line, then one block per sigma
/// (x = eps, y = compression rate), blocks separated by two blank lines.
inline void write_plot_data(std::ostream& out, const std::vector<EntropyCurve>& curves) {
    using detail::fmt9;
    std::vector<double> grid;
    for (const auto& c : curves)
        for (const auto& p : c.points) grid.push_back(p.eps);
    std::sort(grid.begin(), grid.end(), std::greater<>());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    out << "# eps-entropy curves, x = eps (log scale), y = bits/symbol\n";
    out << "# index 0: -log2(eps)\n";
    for (double e : grid) out << fmt9(e) << ' ' << fmt9(-std::log2(e)) << '\n';
    for (const auto& c : curves) {
        out << "\n\n# sigma = " << fmt9(c.sigma) << '\n';
        for (const auto& p : c.points) out << fmt9(p.eps) << ' ' << fmt9(p.compression_rate) << '\n';
    }
}

inline void emit_plot_data(const std::vector<EntropyCurve>& curves, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_plot_data(out, curves);
}

/// Per-sigma (eps, compression rate, baseline) samples read back from a sweep
/// CSV. The baseline column is optional.
struct CsvCurve {
    double sigma;
    std::vector<RatePoint> points;
};

inline std::vector<CsvCurve> read_curves_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    }
    auto col = [&](const std::string& name) {
        const auto it = std::find(cols.begin(), cols.end(), name);
        if (it == cols.end()) throw std::runtime_error("CSV lacks column '" + name + "'");
        return static_cast<std::size_t>(it - cols.begin());
    };
    const std::size_t ci_sigma = col("sigma"), ci_eps = col("eps"), ci_rate = col("compression_rate_bits");
    const auto base_it = std::find(cols.begin(), cols.end(), "baseline_rate_bits");
    const bool has_base = base_it != cols.end();
    const auto ci_base = static_cast<std::size_t>(base_it - cols.begin());
    std::vector<CsvCurve> curves;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
        if (f.size() != cols.size())
            throw std::runtime_error("CSV line " + std::to_string(line_no) + " has " +
                                     std::to_string(f.size()) + " fields");
        const double sigma = std::stod(f[ci_sigma]);
        RatePoint pt{std::stod(f[ci_eps]), std::stod(f[ci_rate])};
        if (has_base) pt.baseline = std::stod(f[ci_base]);
        auto it = std::find_if(curves.begin(), curves.end(), [&](const CsvCurve& c) { return c.sigma == sigma; });
        if (it == curves.end())
            curves.push_back({sigma, {pt}});
        else
            it->points.push_back(pt);
    }
    return curves;
}

}  // namespace epsent

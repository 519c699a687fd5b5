// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any selected criterion fails.
//
//   acceptance [--workers N] [--only K]...

#include <epsent/bounds.hpp>
#include <epsent/compressor.hpp>
#include <epsent/estimators.hpp>
#include <epsent/selftest.hpp>
#include <epsent/sweep.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace epsent;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

class Grid {
public:
    explicit Grid(std::size_t workers) : workers_(workers) {}

    const std::vector<EntropyCurve>& curves() {
        if (!curves_) {
            GridConfig c;
            c.workers = workers_;
            curves_ = run_grid(c);
        }
        return *curves_;
    }

    const EntropyCurve& curve(double sigma) {
        for (const auto& c : curves())
            if (c.sigma == sigma) return c;
        throw std::logic_error("no curve for sigma " + num(sigma));
    }

private:
    std::size_t workers_;
    std::optional<std::vector<EntropyCurve>> curves_;
};

const CurvePoint& at(const EntropyCurve& c, double eps) {
    for (const auto& p : c.points)
        if (std::abs(p.eps - eps) < 1e-12) return p;
    throw std::logic_error("no point at eps " + num(eps));
}

SymbolicSequence iid(std::size_t n, std::size_t alphabet, std::uint64_t seed) {
    return detail::iid_symbols(n, alphabet, seed);
}

Outcome figure_reproduction(Grid& g) {
    Outcome o;
    for (double s : {0.02, 0.01, 0.001}) {
        const double r = at(g.curve(s), 0.5).compression_rate;
        o.require(r >= 0.85 && r <= 1.15, "(a) sigma " + num(s) + " rate " + num(r) + " at eps 0.5");
    }
    for (const auto& p : g.curve(0.5).points) {
        if (p.eps > 0.25) continue;
        const double line = -std::log2(p.eps);
        o.require(std::abs(p.compression_rate - line) <= 0.2 * line,
                  "(b) eps " + num(p.eps) + " rate " + num(p.compression_rate) + " vs " + num(line));
    }
    std::vector<double> rates;
    for (const auto& c : g.curves()) rates.push_back(at(c, 0.004).compression_rate);
    std::size_t inversions = 0;
    for (std::size_t i = 0; i < rates.size(); ++i)
        for (std::size_t j = i + 1; j < rates.size(); ++j) inversions += rates[i] < rates[j];
    o.require(inversions <= 1, "(c) " + std::to_string(inversions) + " inversions at eps 0.004");
    if (o.pass) o.detail = "(a) (b) (c) hold; " + std::to_string(inversions) + " inversions at eps 0.004";
    return o;
}

Outcome pure_noise() {
    Outcome o;
    std::string rates;
    for (std::size_t n : {2, 4, 16}) {
        const double r = compress(iid(1'000'000, n, 100 + n), Algorithm::lz78).report.rate;
        const double l = std::log2(static_cast<double>(n));
        o.require(r >= 0.9 * l && r <= 1.3 * l, "N " + std::to_string(n) + " rate " + num(r));
        rates += " N=" + std::to_string(n) + ":" + num(r / l);
    }
    if (o.pass) o.detail = "rate/log2N" + rates;
    return o;
}

Outcome brudno() {
    Outcome o;
    const auto s = detail::doubling_symbols(1'000'000, 17);
    const double c = compress(s, Algorithm::lz78).report.rate;
    const double b = block_entropy_rate(s, default_max_depth(2, s.size())).value;
    o.require(c >= 0.9 && c <= 1.1, "compression rate " + num(c));
    o.require(b >= 0.9 && b <= 1.1, "block rate " + num(b));
    if (o.pass) o.detail = "compression " + num(c) + ", block " + num(b);
    return o;
}

Outcome sandwich(Grid& g) {
    Outcome o;
    std::size_t checked = 0;
    for (const auto& c : g.curves())
        for (const auto& p : c.points) {
            if (!p.error.empty()) {
                o.require(false, "cell sigma " + num(c.sigma) + " eps " + num(p.eps) + " failed: " + p.error);
                continue;
            }
            if (!(p.p.half_width < 0.02)) continue;
            ++checked;
            const double lo = kifer_lower(p.eps, 1.0 / (2.0 * c.sigma)) - 0.3;
            const double eh = p.bounds.envelope_high;
            const double hi = eh + std::max(0.2, 0.15 * eh);
            o.require(p.compression_rate >= lo && p.compression_rate <= hi,
                      "sigma " + num(c.sigma) + " eps " + num(p.eps) + ": " + num(lo) + " <= " +
                          num(p.compression_rate) + " <= " + num(hi) + " violated");
        }
    o.require(checked > 0, "no cell had a narrow enough p interval");
    if (o.pass) o.detail = std::to_string(checked) + " cells inside their bounds";
    return o;
}

Outcome detection(Grid& g) {
    Outcome o;
    std::string found;
    for (double s : {0.1, 0.02, 0.01}) {
        const auto d = detect_sigma(g.curve(s));
        const double est = d.estimate();
        const bool ok = d.status == DetectionStatus::detected && est >= s / 5.0 && est <= s * 5.0;
        o.require(ok, "sigma " + num(s) + ": status " + std::string(to_string(d.status)) + " estimate " + num(est));
        found += " " + num(s) + "->" + num(est);
    }
    if (o.pass) o.detail = "estimates" + found;
    return o;
}

Outcome round_trips() {
    Outcome o;
    std::mt19937_64 rng(2024);
    std::size_t bad = 0;
    for (int t = 0; t < 10'000; ++t) {
        SymbolicSequence s;
        s.alphabet_size = 2 + rng() % 63;
        s.symbols.resize(rng() % 10'001);
        for (auto& x : s.symbols) x = static_cast<Symbol>(rng() % s.alphabet_size);
        for (auto alg : {Algorithm::lz78, Algorithm::castore}) bad += decode(compress(s, alg).bytes).symbols != s.symbols;
    }
    std::size_t exhaustive = 0;
    for (std::size_t len = 0; len <= 12; ++len)
        for (std::uint32_t bits = 0; bits < (1U << len); ++bits) {
            SymbolicSequence s;
            s.alphabet_size = 2;
            for (std::size_t i = 0; i < len; ++i) s.symbols.push_back(static_cast<Symbol>((bits >> i) & 1U));
            for (auto alg : {Algorithm::lz78, Algorithm::castore}) bad += decode(compress(s, alg).bytes).symbols != s.symbols;
            ++exhaustive;
        }
    o.require(bad == 0, std::to_string(bad) + " round trips differ");
    if (o.pass) o.detail = "20000 random and " + std::to_string(2 * exhaustive) + " exhaustive round trips";
    return o;
}

Outcome analytic(std::size_t workers) {
    Outcome o;
    o.require(bernoulli_entropy(0.5) == 1.0, "H(0.5) != 1");
    o.require(bernoulli_entropy(0.0) == 0.0 && bernoulli_entropy(1.0) == 0.0, "H(0) or H(1) != 0");
    auto near = [&](double got, double want, double tol, const std::string& what) {
        o.require(std::abs(got - want) <= tol, what + " = " + num(got) + ", expected " + num(want));
    };
    near(output_noise_upper(1.0, 0.1, 0.1, 0.5), 1.569, 1e-3, "output bound (1, 0.1, 0.1, 0.5)");
    near(output_noise_upper(1.0, 0.5, 0.02, 0.004), 3.661, 1e-3, "output bound (1, 0.5, 0.02, 0.004)");
    near(kifer_lower(1.0 / 250.0, 1.0), std::log2(250.0), 1e-9, "kifer(1/250, 1)");
    SymbolicSequence period2;
    period2.alphabet_size = 2;
    for (int i = 0; i < 1001; ++i) period2.symbols.push_back(static_cast<Symbol>(i % 2));
    near(conditional_entropy(period2, 2).value, 0.0, 1e-9, "period-2 conditional entropy");

    GridConfig c;
    c.map = MapSpec::doubling();
    c.sigmas = {0.1, 0.01, 0.001};
    c.cells = {2};
    c.workers = workers;
    const auto curves = run_grid(c);
    std::vector<double> r;
    for (const auto& cv : curves) r.push_back(cv.points.front().compression_rate);
    const double h0 = curves.front().points.front().baseline_rate;
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
        o.require(r[i + 1] <= r[i] + 0.05, "doubling rate rises from " + num(r[i]) + " to " + num(r[i + 1]));
    near(r.back(), h0, 0.05, "doubling rate at sigma 0.001 vs sigma 0");
    if (o.pass)
        o.detail = "doubling eps 0.5: " + num(r[0]) + " " + num(r[1]) + " " + num(r[2]) + " -> " + num(h0);
    return o;
}

Outcome determinism(Grid& g) {
    Outcome o;
    GridConfig c;
    c.workers = 1;
    std::ostringstream serial, parallel;
    write_csv(serial, run_grid(c));
    write_csv(parallel, g.curves());
    o.require(serial.str() == parallel.str(), "CSV differs between worker counts");
    if (o.pass) o.detail = std::to_string(serial.str().size()) + " identical bytes";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::size_t workers = 8;
    std::vector<int> only;
    app.add_option("--workers", workers)->check(CLI::PositiveNumber);
    app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 8));
    CLI11_PARSE(app, argc, argv);

    Grid grid(workers);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"figure reproduction on the sigma grid", [&] { return figure_reproduction(grid); }},
        {"i.i.d. source compresses to log2 N", pure_noise},
        {"doubling map compresses to 1 bit", brudno},
        {"rates lie between the lower and upper bounds", [&] { return sandwich(grid); }},
        {"noise amplitude detection", [&] { return detection(grid); }},
        {"compressor round trips", round_trips},
        {"analytic oracles", [&] { return analytic(workers); }},
        {"worker count does not change the CSV", [&] { return determinism(grid); }},
    };

    const std::set<int> selected(only.begin(), only.end());
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %d %s: %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    out.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !out.pass;
    }
    return failed ? 1 : 0;
}

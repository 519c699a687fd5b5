#include <CLI11.hpp>

#include <epsent/compressor.hpp>
#include <epsent/config.hpp>
#include <epsent/dynamics.hpp>
#include <epsent/partition.hpp>
#include <epsent/selftest.hpp>
#include <epsent/sweep.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kConfigError = 2;

struct CommonFlags {
    std::optional<std::string> config_path;
    epsent::ConfigOverrides o;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    auto& o = f.o;
    cmd->add_option("--config", f.config_path, "key = value configuration file");
    cmd->add_option("--map", o.map, "logistic, doubling or tent");
    cmd->add_option("--lambda", o.lambda, "logistic parameter in (0,4]");
    cmd->add_option("--noise-mode", o.noise_mode, "none, output or dynamical");
    cmd->add_option("--sigma", o.sigmas, "noise amplitude (repeatable)")->take_all();
    cmd->add_option("--cells", o.cells, "number of partition cells N (repeatable)")->take_all();
    cmd->add_option("--length", o.length, "orbit length");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--workers", o.workers, "worker threads");
    cmd->add_option("--out-csv", o.out_csv, "CSV output path");
    cmd->add_option("--out-plot", o.out_plot, "gnuplot data output path");
    cmd->add_option("--burn-in", o.burn_in, "discarded initial iterates");
    cmd->add_option("--delta", o.delta, "tolerance for choosing n0");
    cmd->add_option("--flat-slope", o.flat_slope, "plateau slope threshold");
    cmd->add_option("--noise-slope", o.noise_slope, "noise-regime slope threshold");
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

int run_sweep(const CommonFlags& f) {
    const auto cfg = epsent::resolve_config(f.config_path, f.o);
    const auto curves = epsent::run_grid(cfg.grid);
    epsent::emit_csv(curves, cfg.out_csv);
    if (!cfg.out_plot.empty()) epsent::emit_plot_data(curves, cfg.out_plot);
    std::size_t failed = 0;
    for (const auto& c : curves)
        for (const auto& p : c.points)
            if (!p.error.empty()) {
                ++failed;
                std::cerr << "warning: cell sigma=" << c.sigma << " N=" << p.n_cells << " failed: " << p.error << '\n';
            }
    std::cout << "wrote " << curves.size() * cfg.grid.cells.size() << " cells to " << cfg.out_csv << '\n';
    for (const auto& c : curves) {
        const auto d = epsent::detect_sigma(c, cfg.grid.flat_slope, cfg.grid.noise_slope);
        std::printf("sigma=%g status=%s eps2=%g eps1=%g\n", c.sigma, std::string(epsent::to_string(d.status)).c_str(),
                    d.eps2, d.eps1);
    }
    return failed ? kRuntimeFailure : kOk;
}

struct SimulateFlags {
    std::string out = "orbit.txt";
    std::optional<double> x0;
    std::string cylinders_out;
    std::size_t depth = 1;
};

int run_simulate(const CommonFlags& f, const SimulateFlags& s) {
    auto o = f.o;
    if (!o.length) o.length = 10'000;
    const auto cfg = epsent::resolve_config(f.config_path, o);
    const auto& g = cfg.grid;
    if (g.sigmas.size() != 1) throw epsent::config_error("sigma", "simulate takes exactly one value");
    epsent::NoiseSpec noise{g.sigmas.front(), g.mode, g.boundary,
                            epsent::mix_seed(g.master_seed, {epsent::stream::noise})};
    if (s.x0 && !(*s.x0 >= 0.0 && *s.x0 <= 1.0)) throw epsent::config_error("x0", "must lie in [0,1]");
    const double x0 = s.x0 ? *s.x0 : epsent::burned_in_start(g.map, noise, g.burn_in);
    const auto orbit = epsent::generate_orbit(g.map, x0, g.orbit_len, noise);
    {
        std::ofstream out(s.out);
        if (!out) throw std::runtime_error("cannot open '" + s.out + "' for writing");
        epsent::write_orbit(out, orbit);
        if (!out) throw std::runtime_error("write to '" + s.out + "' failed");
    }
    if (!s.cylinders_out.empty()) {
        if (g.cells.size() != 1) throw epsent::config_error("cells", "the cylinder dump takes exactly one value");
        const auto set = epsent::refine_cylinders(g.map, epsent::Partition(g.cells.front()), s.depth);
        std::ofstream out(s.cylinders_out);
        if (!out) throw std::runtime_error("cannot open '" + s.cylinders_out + "' for writing");
        epsent::write_cylinders_csv(out, set);
    }
    return kOk;
}

int run_compress(const std::string& in, const std::string& out, const std::string& algorithm) {
    const auto alg = epsent::detail::as_field("algorithm", [&] { return epsent::parse_algorithm(algorithm); });
    const auto bytes = read_file(in);
    epsent::SymbolicSequence seq;
    seq.alphabet_size = 256;
    seq.symbols.assign(bytes.begin(), bytes.end());
    const auto stream = epsent::compress(seq, alg);
    write_file(out, stream.bytes);
    std::printf("%zu bytes -> %zu bytes (%.4f bits/symbol, %s)\n", bytes.size(), stream.bytes.size(),
                stream.report.rate, std::string(epsent::to_string(alg)).c_str());
    return kOk;
}

int run_decompress(const std::string& in, const std::string& out) {
    const auto seq = epsent::decode(read_file(in));
    if (seq.alphabet_size > 256)
        throw std::runtime_error("stream alphabet " + std::to_string(seq.alphabet_size) + " does not fit in bytes");
    write_file(out, std::vector<std::uint8_t>(seq.symbols.begin(), seq.symbols.end()));
    return kOk;
}

int run_detect(const CommonFlags& f, const std::string& csv) {
    const auto cfg = epsent::resolve_config(f.config_path, f.o);
    std::ifstream in(csv);
    if (!in) throw std::runtime_error("cannot read '" + csv + "'");
    for (const auto& c : epsent::read_curves_csv(in)) {
        if (!f.o.sigmas.empty() &&
            std::find(f.o.sigmas.begin(), f.o.sigmas.end(), c.sigma) == f.o.sigmas.end())
            continue;
        const auto d = epsent::detect_sigma(c.points, cfg.grid.flat_slope, cfg.grid.noise_slope);
        std::printf("sigma=%g eps2=%g eps1=%g status=%s estimate=%g\n", c.sigma, d.eps2, d.eps1,
                    std::string(epsent::to_string(d.status)).c_str(), d.estimate());
    }
    return kOk;
}

int run_selftest() {
    const auto rows = epsent::run_selftest();
    std::size_t failed = 0;
    std::printf("%-11s %-58s %14s %14s %9s  %s\n", "module", "check", "expected", "measured", "tol", "result");
    for (const auto& r : rows) {
        failed += !r.pass;
        std::printf("%-11s %-58s %14.9g %14.9g %9.2g  %s\n", r.module.c_str(), r.name.c_str(), r.expected,
                    r.measured, r.tolerance, r.pass ? "PASS" : "FAIL");
    }
    std::printf("%zu/%zu checks passed\n", rows.size() - failed, rows.size());
    return failed ? kRuntimeFailure : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eps-entropy of randomly perturbed maps"};
    app.require_subcommand(1);

    CommonFlags sweep_flags;
    auto* sweep = app.add_subcommand("sweep", "run the (sigma, eps) grid and write CSV and plot data");
    add_common_flags(sweep, sweep_flags);

    CommonFlags sim_flags;
    SimulateFlags sim;
    auto* simulate = app.add_subcommand("simulate", "dump one orbit, and optionally its cylinders");
    add_common_flags(simulate, sim_flags);
    simulate->add_option("--out", sim.out, "orbit output path");
    simulate->add_option("--x0", sim.x0, "initial condition (default: seeded, burned in)");
    simulate->add_option("--cylinders-out", sim.cylinders_out, "write the depth-n cylinders of --cells N here");
    simulate->add_option("--depth", sim.depth, "cylinder depth n")->check(CLI::PositiveNumber);

    std::string c_in, c_out, algorithm = "lz78";
    auto* compress = app.add_subcommand("compress", "compress a file (one symbol per byte)");
    compress->add_option("input", c_in)->required();
    compress->add_option("output", c_out)->required();
    compress->add_option("--algorithm", algorithm, "lz78 or castore");

    std::string d_in, d_out;
    auto* decompress = app.add_subcommand("decompress", "restore a file written by compress");
    decompress->add_option("input", d_in)->required();
    decompress->add_option("output", d_out)->required();

    CommonFlags detect_flags;
    std::string csv;
    auto* detect = app.add_subcommand("detect", "estimate sigma from a sweep CSV");
    add_common_flags(detect, detect_flags);
    detect->add_option("csv", csv, "sweep CSV")->required();

    auto* selftest = app.add_subcommand("selftest", "run the closed-form checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*sweep) return run_sweep(sweep_flags);
        if (*simulate) return run_simulate(sim_flags, sim);
        if (*compress) return run_compress(c_in, c_out, algorithm);
        if (*decompress) return run_decompress(d_in, d_out);
        if (*detect) return run_detect(detect_flags, csv);
        if (*selftest) return run_selftest();
    } catch (const epsent::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kRuntimeFailure;
}

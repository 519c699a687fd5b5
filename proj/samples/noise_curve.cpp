// A small two-sigma grid on the logistic map, printed as a table, followed by
// the noise level read off each curve.

#include <epsent/sweep.hpp>

#include <cstdio>

int main() {
    using namespace epsent;
    GridConfig c;
    c.sigmas = {0.05, 0.005};
    c.orbit_len = 200'000;
    c.p_samples = 20'000;
    const auto curves = run_grid(c);

    std::printf("%8s %10s %10s %10s %10s\n", "sigma", "eps", "rate", "low", "high");
    for (const auto& curve : curves)
        for (const auto& p : curve.points)
            std::printf("%8g %10.5f %10.4f %10.4f %10.4f\n", curve.sigma, p.eps, p.compression_rate,
                        p.bounds.envelope_low, p.bounds.envelope_high);

    for (const auto& curve : curves) {
        const auto d = detect_sigma(curve);
        std::printf("sigma %g: %s, estimate %.4g\n", curve.sigma, std::string(to_string(d.status)).c_str(),
                    d.estimate());
    }
}

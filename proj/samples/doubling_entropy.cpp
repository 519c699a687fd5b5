// Entropy of the doubling map on the binary partition, three ways.

#include <epsent/compressor.hpp>
#include <epsent/dynamics.hpp>
#include <epsent/estimators.hpp>
#include <epsent/partition.hpp>

#include <cstdio>

int main() {
    using namespace epsent;
    const MapSpec map = MapSpec::doubling();
    NoiseSpec none{0.0, NoiseMode::none, Boundary::reflect, 42};
    const double x0 = burned_in_start(map, none, 1000);
    const auto seq = encode(generate_orbit(map, x0, 1'000'000, none), Partition(2));

    std::printf("block entropy rate (n=10): %.4f bits/symbol\n", block_entropy_rate(seq, 10).value);
    const auto n0 = choose_n0(seq, 0.05);
    std::printf("conditional entropy at n0=%zu: %.4f bits\n", n0.n0, n0.profile[n0.n0 - 1]);
    std::printf("lz78 rate: %.4f bits/symbol\n", compress(seq, Algorithm::lz78).report.rate);
    std::printf("castore rate: %.4f bits/symbol\n", compress(seq, Algorithm::castore).report.rate);
}

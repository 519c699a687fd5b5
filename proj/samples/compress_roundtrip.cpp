#include <epsent/compressor.hpp>

#include <cstdio>
#include <random>

int main() {
    using namespace epsent;
    SymbolicSequence seq;
    seq.alphabet_size = 4;
    std::mt19937_64 rng(9);
    // a biased source: entropy 1.75 bits
    std::discrete_distribution<int> pick{4, 2, 1, 1};
    for (int i = 0; i < 500'000; ++i) seq.symbols.push_back(static_cast<Symbol>(pick(rng)));

    for (Algorithm alg : {Algorithm::lz78, Algorithm::castore}) {
        const auto stream = compress(seq, alg);
        const auto back = decode(stream.bytes);
        std::printf("%-8s %zu phrases, %.4f bits/symbol, round trip %s\n", std::string(to_string(alg)).c_str(),
                    stream.report.phrase_count, stream.report.rate, back.symbols == seq.symbols ? "ok" : "BROKEN");
    }
}

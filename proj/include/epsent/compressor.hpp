#pragma once

// Dictionary compressors used as the computable stand-in for algorithmic
// information content: I(s) = |encode(s)| in bits, rate = I(s) / |s|.
//
// Stream layout (little-endian header, 16 bytes):
//   magic "EPSZ" | version u8 = 1 | alphabet N u16 | input_len u64 | algorithm u8
// followed by the MSB-first phrase bit stream, zero-padded to a byte.
//
// lz78: incremental parsing into phrases parent+symbol. Phrase k (1-based) is
//   coded as the parent phrase index in [0,k) (0 = empty word) followed by the
//   extension symbol's rank among the symbols the parent does not have as
//   children yet, both with truncated binary codes. A parent missing a single
//   child therefore costs nothing for the symbol. If the input ends inside a
//   dictionary word, that word's index is emitted alone; the decoder
//   recognises it because it completes input_len exactly.
//
// castore: dictionary seeded with the N single symbols. Each phrase is the
//   longest dictionary word w1 at the cursor followed by the longest word w2
//   after it; w1w2 joins the dictionary. Both indices are written with
//   ceil(log2 D) bits, D the dictionary size before the phrase. An input that
//   ends right after w1 emits w1 alone.

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bitio.hpp"
#include "errors.hpp"
#include "partition.hpp"
#include "random.hpp"

namespace epsent {

enum class Algorithm : std::uint8_t { lz78 = 1, castore = 2 };

inline std::string_view to_string(Algorithm a) { return a == Algorithm::lz78 ? "lz78" : "castore"; }

inline Algorithm parse_algorithm(std::string_view s) {
    if (s == "lz78") return Algorithm::lz78;
    if (s == "castore") return Algorithm::castore;
    throw domain_error("unknown compression algorithm '" + std::string(s) + "'");
}

struct CompressionReport {
    std::size_t input_len = 0;
    std::size_t phrase_count = 0;
    std::uint64_t encoded_bits = 0;  // header + payload, padding excluded
    double rate = 0.0;               // encoded_bits / input_len, 0 for empty input
    Algorithm algorithm = Algorithm::lz78;
    std::uint64_t hash = 0;          // FNV-1a of the input symbols
};

struct CompressedStream {
    std::vector<std::uint8_t> bytes;
    CompressionReport report;
};

struct CompressorOptions {
    std::size_t max_nodes = 100'000'000;
};

inline constexpr std::array<std::uint8_t, 4> kStreamMagic{'E', 'P', 'S', 'Z'};
inline constexpr std::uint8_t kStreamVersion = 1;
inline constexpr std::size_t kHeaderBytes = 16;

inline std::uint64_t symbol_hash(std::span<const Symbol> symbols) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (Symbol s : symbols) {
        h = (h ^ (s & 0xFFU)) * 0x100000001b3ULL;
        h = (h ^ (s >> 8)) * 0x100000001b3ULL;
    }
    return h;
}

namespace detail {

/// Open-addressing map from (node, symbol) to child node.
class EdgeTable {
public:
    static constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();

    explicit EdgeTable(std::size_t alphabet) : alphabet_(alphabet) { rehash(1024); }

    std::uint32_t find(std::uint32_t node, Symbol s) const {
        const std::uint64_t key = make_key(node, s);
        for (std::size_t i = slot(key);; i = (i + 1) & mask_) {
            if (keys_[i] == key) return vals_[i];
            if (keys_[i] == kEmpty) return npos;
        }
    }

    void insert(std::uint32_t node, Symbol s, std::uint32_t child) {
        if (2 * (size_ + 1) > keys_.size()) rehash(keys_.size() * 2);
        place(make_key(node, s), child);
        ++size_;
    }

private:
    static constexpr std::uint64_t kEmpty = std::numeric_limits<std::uint64_t>::max();

    std::uint64_t make_key(std::uint32_t node, Symbol s) const { return node * alphabet_ + s; }
    std::size_t slot(std::uint64_t key) const { return splitmix64(key) & mask_; }

    void place(std::uint64_t key, std::uint32_t val) {
        std::size_t i = slot(key);
        while (keys_[i] != kEmpty) i = (i + 1) & mask_;
        keys_[i] = key;
        vals_[i] = val;
    }

    void rehash(std::size_t capacity) {
        std::vector<std::uint64_t> old_keys = std::move(keys_);
        std::vector<std::uint32_t> old_vals = std::move(vals_);
        keys_.assign(capacity, kEmpty);
        vals_.assign(capacity, 0);
        mask_ = capacity - 1;
        for (std::size_t i = 0; i < old_keys.size(); ++i)
            if (old_keys[i] != kEmpty) place(old_keys[i], old_vals[i]);
    }

    std::uint64_t alphabet_;
    std::vector<std::uint64_t> keys_;
    std::vector<std::uint32_t> vals_;
    std::size_t mask_ = 0;
    std::size_t size_ = 0;
};

/// Per-node sorted list of child symbols, used to rank an extension symbol
/// among the symbols a node is still missing.
class ChildSymbols {
public:
    static constexpr std::uint32_t nil = std::numeric_limits<std::uint32_t>::max();

    void add_node() {
        head_.push_back(nil);
        count_.push_back(0);
    }
    std::size_t child_count(std::uint32_t node) const { return count_[node]; }

    /// s minus the number of existing children with a smaller symbol.
    std::uint64_t rank_of(std::uint32_t node, Symbol s) const {
        std::uint64_t r = s;
        for (std::uint32_t e = head_[node]; e != nil && sym_[e] < s; e = next_[e]) --r;
        return r;
    }

    /// The r-th (0-based) symbol that is not yet a child.
    Symbol missing_at(std::uint32_t node, std::uint64_t r) const {
        std::uint64_t s = r;
        for (std::uint32_t e = head_[node]; e != nil && sym_[e] <= s; e = next_[e]) ++s;
        return static_cast<Symbol>(s);
    }

    void insert(std::uint32_t node, Symbol s) {
        const auto e = static_cast<std::uint32_t>(sym_.size());
        sym_.push_back(s);
        std::uint32_t prev = nil;
        std::uint32_t at = head_[node];
        while (at != nil && sym_[at] < s) {
            prev = at;
            at = next_[at];
        }
        next_.push_back(at);
        (prev == nil ? head_[node] : next_[prev]) = e;
        ++count_[node];
    }

private:
    std::vector<std::uint32_t> head_;
    std::vector<std::uint32_t> count_;
    std::vector<Symbol> sym_;
    std::vector<std::uint32_t> next_;
};

inline void write_header(std::vector<std::uint8_t>& out, std::size_t alphabet, std::size_t len,
                         Algorithm alg) {
    out.insert(out.end(), kStreamMagic.begin(), kStreamMagic.end());
    out.push_back(kStreamVersion);
    out.push_back(static_cast<std::uint8_t>(alphabet & 0xFF));
    out.push_back(static_cast<std::uint8_t>(alphabet >> 8));
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(std::uint64_t{len} >> (8 * i)));
    out.push_back(static_cast<std::uint8_t>(alg));
}

struct Header {
    std::size_t alphabet;
    std::uint64_t input_len;
    Algorithm algorithm;
};

inline Header read_header(std::span<const std::uint8_t> in) {
    if (in.size() < kHeaderBytes) throw decode_error("stream shorter than header", in.size());
    if (!std::equal(kStreamMagic.begin(), kStreamMagic.end(), in.begin()))
        throw decode_error("bad magic", 0);
    if (in[4] != kStreamVersion) throw decode_error("unsupported version", 4);
    Header h{};
    h.alphabet = std::size_t{in[5]} | (std::size_t{in[6]} << 8);
    if (h.alphabet < 2) throw decode_error("alphabet size below 2", 5);
    h.input_len = 0;
    for (int i = 0; i < 8; ++i) h.input_len |= std::uint64_t{in[7 + i]} << (8 * i);
    if (in[15] != static_cast<std::uint8_t>(Algorithm::lz78) &&
        in[15] != static_cast<std::uint8_t>(Algorithm::castore))
        throw decode_error("unknown algorithm id", 15);
    h.algorithm = static_cast<Algorithm>(in[15]);
    return h;
}

inline void check_input(const SymbolicSequence& seq) {
    if (seq.alphabet_size < 2 || seq.alphabet_size > kMaxAlphabet)
        throw domain_error("alphabet size must lie in [2, 65535]");
    for (Symbol s : seq.symbols)
        if (s >= seq.alphabet_size) throw domain_error("symbol outside alphabet");
}

inline CompressedStream finish(std::vector<std::uint8_t> bytes, std::uint64_t payload_bits,
                               std::size_t phrases, const SymbolicSequence& seq, Algorithm alg) {
    CompressedStream cs{std::move(bytes), {}};
    auto& r = cs.report;
    r.input_len = seq.size();
    r.phrase_count = phrases;
    r.encoded_bits = kHeaderBytes * 8 + payload_bits;
    r.rate = seq.size() ? static_cast<double>(r.encoded_bits) / static_cast<double>(seq.size()) : 0.0;
    r.algorithm = alg;
    r.hash = symbol_hash(seq.symbols);
    return cs;
}

inline unsigned ceil_log2(std::uint64_t m) {
    return m <= 1 ? 0U : static_cast<unsigned>(std::bit_width(m - 1));
}

}  // namespace detail

inline CompressedStream lz78_encode(const SymbolicSequence& seq, CompressorOptions opt = {}) {
    detail::check_input(seq);
    const std::size_t n_sym = seq.alphabet_size;
    std::vector<std::uint8_t> bytes;
    detail::write_header(bytes, n_sym, seq.size(), Algorithm::lz78);
    BitWriter bits(bytes);

    detail::EdgeTable edges(n_sym);
    detail::ChildSymbols children;
    children.add_node();  // root = node 0 = empty word

    std::uint32_t cur = 0;
    std::uint64_t k = 1;  // number of the next phrase; also its node id
    for (Symbol s : seq.symbols) {
        const std::uint32_t child = edges.find(cur, s);
        if (child != detail::EdgeTable::npos) {
            cur = child;
            continue;
        }
        if (k >= opt.max_nodes)
            throw resource_error("lz78 dictionary exceeds the cap of " + std::to_string(opt.max_nodes) +
                                 " nodes");
        bits.write_truncated(cur, k);
        bits.write_truncated(children.rank_of(cur, s), n_sym - children.child_count(cur));
        edges.insert(cur, s, static_cast<std::uint32_t>(k));
        children.insert(cur, s);
        children.add_node();
        cur = 0;
        ++k;
    }
    std::size_t phrases = k - 1;
    if (cur != 0) {
        bits.write_truncated(cur, k);
        ++phrases;
    }
    const auto payload = bits.bits_written();
    return detail::finish(std::move(bytes), payload, phrases, seq, Algorithm::lz78);
}

inline CompressedStream castore_encode(const SymbolicSequence& seq, CompressorOptions opt = {}) {
    detail::check_input(seq);
    const std::size_t n_sym = seq.alphabet_size;
    std::vector<std::uint8_t> bytes;
    detail::write_header(bytes, n_sym, seq.size(), Algorithm::castore);
    BitWriter bits(bytes);

    constexpr std::uint32_t kNoWord = std::numeric_limits<std::uint32_t>::max();
    detail::EdgeTable edges(n_sym);
    std::vector<std::uint32_t> word_of{kNoWord};  // node -> dictionary index
    for (std::size_t s = 0; s < n_sym; ++s) {
        edges.insert(0, static_cast<Symbol>(s), static_cast<std::uint32_t>(word_of.size()));
        word_of.push_back(static_cast<std::uint32_t>(s));
    }
    std::uint64_t dict = n_sym;

    const auto& in = seq.symbols;
    const std::size_t len = in.size();
    // longest dictionary word starting at pos: (node, length)
    auto longest = [&](std::size_t pos) {
        std::uint32_t node = 0, best = 0;
        std::size_t depth = 0, best_len = 0;
        while (pos + depth < len) {
            const std::uint32_t next = edges.find(node, in[pos + depth]);
            if (next == detail::EdgeTable::npos) break;
            node = next;
            ++depth;
            if (word_of[node] != kNoWord) {
                best = node;
                best_len = depth;
            }
        }
        return std::pair{best, best_len};
    };

    std::size_t pos = 0;
    std::size_t phrases = 0;
    while (pos < len) {
        const unsigned width = detail::ceil_log2(dict);
        const auto [w1, len1] = longest(pos);
        bits.write(word_of[w1], width);
        pos += len1;
        ++phrases;
        if (pos == len) break;
        const auto [w2, len2] = longest(pos);
        bits.write(word_of[w2], width);
        // w1w2 becomes a word: extend w1's node along the symbols of w2
        std::uint32_t node = w1;
        for (std::size_t i = pos; i < pos + len2; ++i) {
            std::uint32_t next = edges.find(node, in[i]);
            if (next == detail::EdgeTable::npos) {
                if (word_of.size() >= opt.max_nodes)
                    throw resource_error("castore dictionary exceeds the cap of " +
                                         std::to_string(opt.max_nodes) + " nodes");
                next = static_cast<std::uint32_t>(word_of.size());
                edges.insert(node, in[i], next);
                word_of.push_back(kNoWord);
            }
            node = next;
        }
        word_of[node] = static_cast<std::uint32_t>(dict++);
        pos += len2;
    }
    const auto payload = bits.bits_written();
    return detail::finish(std::move(bytes), payload, phrases, seq, Algorithm::castore);
}

inline CompressedStream compress(const SymbolicSequence& seq, Algorithm alg,
                                 CompressorOptions opt = {}) {
    return alg == Algorithm::lz78 ? lz78_encode(seq, opt) : castore_encode(seq, opt);
}

namespace detail {

inline void check_room(std::size_t have, std::uint64_t add, std::uint64_t total, std::size_t at) {
    if (have + add > total) throw decode_error("phrase runs past the declared length", at);
}

inline SymbolicSequence lz78_decode_payload(std::span<const std::uint8_t> in, const Header& h,
                                            const CompressorOptions& opt) {
    SymbolicSequence seq;
    seq.alphabet_size = h.alphabet;
    auto& out = seq.symbols;
    out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(h.input_len, 1ULL << 28)));
    BitReader bits(in, kHeaderBytes);

    ChildSymbols children;
    children.add_node();
    std::vector<std::pair<std::size_t, std::size_t>> span_of{{0, 0}};  // node -> (offset, length)
    std::uint64_t k = 1;
    while (out.size() < h.input_len) {
        const std::size_t at = bits.byte_offset();
        const auto parent = static_cast<std::uint32_t>(bits.read_truncated(k));
        const auto [off, plen] = span_of[parent];
        check_room(out.size(), plen, h.input_len, at);
        if (out.size() + plen == h.input_len) {
            if (plen == 0) throw decode_error("empty final phrase", at);
            for (std::size_t i = 0; i < plen; ++i) out.push_back(out[off + i]);
            break;
        }
        const std::uint64_t missing = h.alphabet - children.child_count(parent);
        if (missing == 0) throw decode_error("parent phrase has no free extension", at);
        const Symbol s = children.missing_at(parent, bits.read_truncated(missing));
        if (k >= opt.max_nodes) throw resource_error("lz78 dictionary exceeds the node cap");
        const std::size_t start = out.size();
        for (std::size_t i = 0; i < plen; ++i) out.push_back(out[off + i]);
        out.push_back(s);
        children.insert(parent, s);
        children.add_node();
        span_of.emplace_back(start, plen + 1);
        ++k;
    }
    bits.expect_end();
    return seq;
}

inline SymbolicSequence castore_decode_payload(std::span<const std::uint8_t> in, const Header& h,
                                               const CompressorOptions& opt) {
    SymbolicSequence seq;
    seq.alphabet_size = h.alphabet;
    auto& out = seq.symbols;
    out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(h.input_len, 1ULL << 28)));
    BitReader bits(in, kHeaderBytes);

    // word -> (offset into output, length); seeds use offset = npos and carry the symbol in length
    constexpr std::size_t kSeed = std::numeric_limits<std::size_t>::max();
    std::vector<std::pair<std::size_t, std::size_t>> words;
    for (std::size_t s = 0; s < h.alphabet; ++s) words.emplace_back(kSeed, s);

    auto emit = [&](std::uint64_t idx, std::size_t at) {
        if (idx >= words.size()) throw decode_error("dictionary index out of range", at);
        const auto [off, len] = words[idx];
        if (off == kSeed) {
            check_room(out.size(), 1, h.input_len, at);
            out.push_back(static_cast<Symbol>(len));
            return std::size_t{1};
        }
        check_room(out.size(), len, h.input_len, at);
        for (std::size_t i = 0; i < len; ++i) out.push_back(out[off + i]);
        return len;
    };

    while (out.size() < h.input_len) {
        const unsigned width = ceil_log2(words.size());
        const std::size_t start = out.size();
        std::size_t at = bits.byte_offset();
        const std::size_t len1 = emit(bits.read(width), at);
        if (out.size() == h.input_len) break;
        at = bits.byte_offset();
        const std::size_t len2 = emit(bits.read(width), at);
        if (words.size() >= opt.max_nodes) throw resource_error("castore dictionary exceeds the node cap");
        words.emplace_back(start, len1 + len2);
    }
    bits.expect_end();
    return seq;
}

}  // namespace detail

/// Decodes a stream from either algorithm; the header says which.
inline SymbolicSequence decode(std::span<const std::uint8_t> stream, CompressorOptions opt = {}) {
    const auto h = detail::read_header(stream);
    return h.algorithm == Algorithm::lz78 ? detail::lz78_decode_payload(stream, h, opt)
                                          : detail::castore_decode_payload(stream, h, opt);
}

inline SymbolicSequence lz78_decode(std::span<const std::uint8_t> stream, CompressorOptions opt = {}) {
    const auto h = detail::read_header(stream);
    if (h.algorithm != Algorithm::lz78) throw decode_error("not an lz78 stream", 15);
    return detail::lz78_decode_payload(stream, h, opt);
}

inline SymbolicSequence castore_decode(std::span<const std::uint8_t> stream,
                                       CompressorOptions opt = {}) {
    const auto h = detail::read_header(stream);
    if (h.algorithm != Algorithm::castore) throw decode_error("not a castore stream", 15);
    return detail::castore_decode_payload(stream, h, opt);
}

struct ComplexityRate {
    double rate = 0.0;
    std::uint64_t encoded_bits = 0;
    std::vector<std::pair<std::size_t, double>> prefix_curve;  // (prefix length, rate)
};

/// Compression rate of the whole sequence plus the rates of prefixes of length
/// 2^10, 2^11, ... for judging convergence of I(s^n)/n.
inline ComplexityRate complexity_rate(const SymbolicSequence& seq, Algorithm alg,
                                      CompressorOptions opt = {}) {
    if (seq.size() == 0) throw domain_error("complexity_rate needs a nonempty sequence");
    ComplexityRate out;
    const auto full = compress(seq, alg, opt).report;
    out.rate = full.rate;
    out.encoded_bits = full.encoded_bits;
    SymbolicSequence prefix;
    prefix.alphabet_size = seq.alphabet_size;
    for (std::size_t len = 1024; len < seq.size(); len *= 2) {
        prefix.symbols.assign(seq.symbols.begin(), seq.symbols.begin() + static_cast<std::ptrdiff_t>(len));
        out.prefix_curve.emplace_back(len, compress(prefix, alg, opt).report.rate);
    }
    out.prefix_curve.emplace_back(seq.size(), full.rate);
    return out;
}

}  // namespace epsent

#pragma once

// Run configuration: a key = value file, flag overrides on top, one
// validation pass before any work starts.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "compressor.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "sweep.hpp"

namespace epsent {

struct RunConfig {
    GridConfig grid;
    std::string out_csv = "entropy_curves.csv";
    std::string out_plot;  // empty: no plot data
};

/// Command-line values; set fields win over the file.
struct ConfigOverrides {
    std::optional<std::string> map;
    std::optional<double> lambda;
    std::optional<std::string> noise_mode;
    std::vector<double> sigmas;       // empty: keep
    std::vector<std::size_t> cells;   // empty: keep
    std::optional<std::size_t> length;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::optional<std::string> out_csv;
    std::optional<std::string> out_plot;
    std::optional<std::size_t> burn_in;
    std::optional<double> delta;
    std::optional<double> flat_slope;
    std::optional<double> noise_slope;
};

namespace detail {

inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& field, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw config_error(field, "expected a number, got '" + text + "'");
    }
}

inline std::uint64_t parse_unsigned(const std::string& field, const std::string& text) {
    std::uint64_t v = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || text.empty())
        throw config_error(field, "expected a nonnegative integer, got '" + text + "'");
    return v;
}

inline bool parse_bool(const std::string& field, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw config_error(field, "expected true or false, got '" + text + "'");
}

inline std::string unquote(const std::string& s) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
        return s.substr(1, s.size() - 2);
    return s;
}

// "[a, b, c]" or a bare scalar.
inline std::vector<std::string> parse_list(const std::string& field, const std::string& text) {
    std::string body = text;
    if (!body.empty() && body.front() == '[') {
        if (body.back() != ']') throw config_error(field, "unterminated list");
        body = body.substr(1, body.size() - 2);
    }
    std::vector<std::string> items;
    std::stringstream ss(body);
    for (std::string item; std::getline(ss, item, ',');) {
        item = trim(item);
        if (item.empty()) throw config_error(field, "empty list element");
        items.push_back(item);
    }
    return items;
}

inline MapSpec with_kind(const std::string& name, double lambda) {
    try {
        switch (parse_map_kind(name)) {
            case MapKind::logistic: {
                MapSpec m = MapSpec::logistic(4.0);
                m.lambda = lambda;
                return m;
            }
            case MapKind::doubling: return MapSpec::doubling();
            case MapKind::tent: return MapSpec::tent();
        }
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& e) {
        throw config_error("map", e.what());
    }
    throw config_error("map", "unknown map '" + name + "'");
}

template <class Parse>
auto as_field(const std::string& field, Parse&& parse) {
    try {
        return parse();
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& e) {
        throw config_error(field, e.what());
    }
}

}  // namespace detail

/// Reads `key = value` lines. '#' starts a comment; lists are written [a, b].
/// Unknown keys are rejected. The result is not validated yet.
inline RunConfig parse_config(std::istream& in, RunConfig base = {}) {
    using namespace detail;
    RunConfig c = std::move(base);
    std::string map_name(to_string(c.grid.map.kind));
    double lambda = c.grid.map.lambda;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(line_no), "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw config_error(key, "given more than once");
        seen.push_back(key);

        if (key == "map") {
            map_name = value;
        } else if (key == "lambda") {
            lambda = parse_real(key, value);
        } else if (key == "noise_mode") {
            c.grid.mode = as_field(key, [&] { return parse_noise_mode(value); });
        } else if (key == "boundary") {
            c.grid.boundary = as_field(key, [&] { return parse_boundary(value); });
        } else if (key == "sigma") {
            c.grid.sigmas.clear();
            for (const auto& s : parse_list(key, value)) c.grid.sigmas.push_back(parse_real(key, s));
        } else if (key == "n_list") {
            c.grid.cells.clear();
            for (const auto& s : parse_list(key, value))
                c.grid.cells.push_back(static_cast<std::size_t>(parse_unsigned(key, s)));
        } else if (key == "length") {
            c.grid.orbit_len = parse_unsigned(key, value);
        } else if (key == "burn_in") {
            c.grid.burn_in = parse_unsigned(key, value);
        } else if (key == "seed") {
            c.grid.master_seed = parse_unsigned(key, value);
        } else if (key == "workers") {
            c.grid.workers = parse_unsigned(key, value);
        } else if (key == "out_csv") {
            c.out_csv = value;
        } else if (key == "out_plot") {
            c.out_plot = value;
        } else if (key == "delta") {
            c.grid.delta = parse_real(key, value);
        } else if (key == "flat_slope") {
            c.grid.flat_slope = parse_real(key, value);
        } else if (key == "noise_slope") {
            c.grid.noise_slope = parse_real(key, value);
        } else if (key == "algorithm") {
            c.grid.algorithm = as_field(key, [&] { return parse_algorithm(value); });
        } else if (key == "bias_correction") {
            c.grid.estimator.bias_correction = parse_bool(key, value);
        } else if (key == "max_depth") {
            c.grid.max_depth = parse_unsigned(key, value);
        } else if (key == "p_samples") {
            c.grid.p_samples = parse_unsigned(key, value);
        } else {
            throw config_error(key, "unknown key");
        }
    }
    c.grid.map = with_kind(map_name, lambda);
    return c;
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw config_error("config", "cannot read '" + path + "'");
    return parse_config(in, std::move(base));
}

inline void apply_overrides(RunConfig& c, const ConfigOverrides& o) {
    using namespace detail;
    if (o.map || o.lambda) {
        const std::string name = o.map ? *o.map : std::string(to_string(c.grid.map.kind));
        c.grid.map = with_kind(name, o.lambda ? *o.lambda : c.grid.map.lambda);
    }
    if (o.noise_mode) c.grid.mode = as_field("noise_mode", [&] { return parse_noise_mode(*o.noise_mode); });
    if (!o.sigmas.empty()) c.grid.sigmas = o.sigmas;
    if (!o.cells.empty()) c.grid.cells = o.cells;
    if (o.length) c.grid.orbit_len = *o.length;
    if (o.seed) c.grid.master_seed = *o.seed;
    if (o.workers) c.grid.workers = *o.workers;
    if (o.out_csv) c.out_csv = *o.out_csv;
    if (o.out_plot) c.out_plot = *o.out_plot;
    if (o.burn_in) c.grid.burn_in = *o.burn_in;
    if (o.delta) c.grid.delta = *o.delta;
    if (o.flat_slope) c.grid.flat_slope = *o.flat_slope;
    if (o.noise_slope) c.grid.noise_slope = *o.noise_slope;
}

inline void validate(const RunConfig& c) {
    validate(c.grid);
    if (c.out_csv.empty()) throw config_error("out_csv", "must not be empty");
}

/// Optional file, then overrides, then validation.
inline RunConfig resolve_config(const std::optional<std::string>& path, const ConfigOverrides& o) {
    RunConfig c = path ? load_config_file(*path) : RunConfig{};
    apply_overrides(c, o);
    validate(c);
    return c;
}

}  // namespace epsent

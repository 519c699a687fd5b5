#include <epsent/sweep.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace epsent;

namespace {

GridConfig small_grid() {
    GridConfig c;
    c.sigmas = {0.1, 0.01};
    c.cells = {2, 4, 8, 16};
    c.orbit_len = 20'000;
    c.p_samples = 10'000;
    return c;
}

std::string csv_of(const std::vector<EntropyCurve>& curves) {
    std::ostringstream s;
    write_csv(s, curves);
    return s.str();
}

std::vector<RatePoint> dense(double (*f)(double)) {
    std::vector<RatePoint> pts;
    for (double x = 0.1; x <= 8.0 + 1e-9; x += 0.1) pts.push_back({std::exp2(-x), f(std::exp2(-x))});
    return pts;
}

}  // namespace

TEST(Seeds, ContractValues) {
    EXPECT_EQ(cell_seed(1, 2, 3), mix_seed(1, {2, 3}));
    EXPECT_EQ(companion_seed(1, 3), mix_seed(1, {0xC0C0C0C0ULL, 3}));
    EXPECT_NE(cell_seed(1, 0, 1), cell_seed(1, 1, 0));
}

TEST(Validate, NamesTheField) {
    auto expect_field = [](GridConfig c, const std::string& field) {
        try {
            validate(c);
            ADD_FAILURE() << "no error for " << field;
        } catch (const config_error& e) {
            EXPECT_EQ(e.field(), field);
        }
    };
    GridConfig c;
    c.map.lambda = 5.0;
    expect_field(c, "lambda");
    c = {};
    c.sigmas = {0.1, -0.1};
    expect_field(c, "sigma");
    c = {};
    c.sigmas.clear();
    expect_field(c, "sigma");
    c = {};
    c.cells = {2, 1};
    expect_field(c, "n_list");
    c = {};
    c.orbit_len = 999;
    expect_field(c, "length");
    c = {};
    c.workers = 0;
    expect_field(c, "workers");
    c = {};
    c.delta = 0.0;
    expect_field(c, "delta");
    c = {};
    c.noise_slope = 0.1;
    expect_field(c, "noise_slope");
    EXPECT_NO_THROW(validate(GridConfig{}));
}

TEST(RunGrid, ShapeAndOrdering) {
    const auto curves = run_grid(small_grid());
    ASSERT_EQ(curves.size(), 2U);
    for (const auto& c : curves) {
        ASSERT_EQ(c.points.size(), 4U);
        for (std::size_t j = 1; j < 4; ++j) EXPECT_GT(c.points[j - 1].eps, c.points[j].eps);
        for (const auto& p : c.points) {
            EXPECT_TRUE(p.error.empty()) << p.error;
            EXPECT_GT(p.compression_rate, 0.0);
            EXPECT_GE(p.p.p, 0.0);
            EXPECT_DOUBLE_EQ(p.bounds.pure_noise_line, -std::log2(p.eps));
            EXPECT_DOUBLE_EQ(p.upper_bound, p.bounds.dynamical_upper);
        }
    }
    const auto text = csv_of(curves);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 9);
    EXPECT_EQ(text.substr(0, text.find('\n')), std::string(kCsvHeader));
}

TEST(RunGrid, WorkerCountDoesNotChangeOutput) {
    auto c = small_grid();
    c.workers = 1;
    const auto a = csv_of(run_grid(c));
    c.workers = 4;
    EXPECT_EQ(csv_of(run_grid(c)), a);
    c.master_seed = 2;
    EXPECT_NE(csv_of(run_grid(c)), a);
}

TEST(RunGrid, UnperturbedDoublingIsOneBit) {
    GridConfig c;
    c.map = MapSpec::doubling();
    c.mode = NoiseMode::dynamical;
    c.sigmas = {0.0};
    c.cells = {2};
    c.p_samples = 10'000;
    const auto curves = run_grid(c);
    const auto& p = curves.at(0).points.at(0);
    EXPECT_NEAR(p.compression_rate, 1.0, 0.1);
    EXPECT_EQ(p.p.p, 0.0);
    EXPECT_TRUE(std::isinf(p.bounds.envelope_low));
}

TEST(RunGrid, FailedCellsAreRecordedNotFatal) {
    auto c = small_grid();
    c.max_depth = 200;  // N^n overflows, every companion fails
    const auto curves = run_grid(c);
    for (const auto& cv : curves)
        for (const auto& p : cv.points) {
            EXPECT_FALSE(p.error.empty());
            EXPECT_TRUE(std::isnan(p.compression_rate));
        }
    EXPECT_NE(csv_of(curves).find("nan"), std::string::npos);
}

TEST(Csv, EmptyAndSorted) {
    EXPECT_EQ(csv_of({}), std::string(kCsvHeader) + "\n");
    EntropyCurve lo, hi;
    lo.sigma = 0.01;
    hi.sigma = 0.5;
    for (std::size_t n : {8U, 2U, 4U}) {
        CurvePoint p;
        p.n_cells = n;
        p.eps = 1.0 / static_cast<double>(n);
        lo.points.push_back(p);
        hi.points.push_back(p);
    }
    const auto text = csv_of({lo, hi});
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> firsts;
    while (std::getline(in, line)) firsts.push_back(line.substr(0, line.find(',', line.find(',') + 1)));
    EXPECT_EQ(firsts, (std::vector<std::string>{"0.5,0.5", "0.5,0.25", "0.5,0.125", "0.01,0.5",
                                                "0.01,0.25", "0.01,0.125"}));
}

TEST(Csv, NineSignificantDigits) {
    EntropyCurve c;
    c.sigma = 1.0 / 3.0;
    CurvePoint p;
    p.eps = 0.5;
    p.n_cells = 2;
    p.compression_rate = 2.0 / 3.0;
    c.points.push_back(p);
    const auto text = csv_of({c});
    EXPECT_NE(text.find("0.333333333,0.5,2,0,0.666666667"), std::string::npos);
}

TEST(Csv, ReadBack) {
    const auto curves = run_grid(small_grid());
    std::istringstream in(csv_of(curves));
    const auto back = read_curves_csv(in);
    ASSERT_EQ(back.size(), 2U);
    EXPECT_EQ(back[0].sigma, 0.1);
    ASSERT_EQ(back[0].points.size(), 4U);
    EXPECT_NEAR(back[0].points[1].rate, curves[0].points[1].compression_rate, 1e-8);
    EXPECT_NEAR(back[0].points[1].baseline, curves[0].points[1].baseline_rate, 1e-8);

    std::istringstream broken("sigma,eps,compression_rate_bits\n0.1,0.5\n");
    EXPECT_THROW(read_curves_csv(broken), std::runtime_error);
    std::istringstream missing("sigma,eps\n");
    EXPECT_THROW(read_curves_csv(missing), std::runtime_error);
    std::istringstream empty("");
    EXPECT_THROW(read_curves_csv(empty), std::runtime_error);
}

TEST(PlotData, BlocksPerSigma) {
    const auto curves = run_grid(small_grid());
    std::ostringstream s;
    write_plot_data(s, curves);
    const auto text = s.str();
    EXPECT_NE(text.find("# sigma = 0.1\n"), std::string::npos);
    EXPECT_NE(text.find("# sigma = 0.01\n"), std::string::npos);
    EXPECT_NE(text.find("0.5 1\n"), std::string::npos);  // -log2(0.5) line
    std::size_t blanks = 0;
    for (std::size_t at = text.find("\n\n\n"); at != std::string::npos; at = text.find("\n\n\n", at + 1)) ++blanks;
    EXPECT_EQ(blanks, 2U);
}

TEST(DetectSigma, SyntheticKnee) {
    const auto d = detect_sigma(dense([](double e) { return std::max(1.0, -std::log2(e)); }));
    EXPECT_EQ(d.status, DetectionStatus::detected);
    EXPECT_NEAR(std::log2(d.eps1), -1.0, 0.15);
    EXPECT_NEAR(std::log2(d.eps2), -1.0, 0.15);
    EXPECT_NEAR(d.estimate(), 0.5, 0.05);
}

TEST(DetectSigma, PureRegimes) {
    EXPECT_EQ(detect_sigma(dense([](double) { return 1.0; })).status, DetectionStatus::plateau_only);
    EXPECT_EQ(detect_sigma(dense([](double e) { return -std::log2(e); })).status, DetectionStatus::noise_only);
}

TEST(DetectSigma, TooFewPointsOrNonFinite) {
    EXPECT_EQ(detect_sigma(std::vector<RatePoint>{{0.5, 1}, {0.25, 1}, {0.125, 3}}).status,
              DetectionStatus::undetermined);
    const double nan = std::nan("");
    EXPECT_EQ(detect_sigma(std::vector<RatePoint>{{0.5, 1}, {0.25, 1}, {0.125, 3}, {0.0625, nan}}).status,
              DetectionStatus::undetermined);
}

TEST(DetectSigma, BaselineRemovesACommonTrend) {
    // the perturbed rate follows a rising baseline for coarse eps, then the noise line
    std::vector<RatePoint> pts;
    for (double x = 1.0; x <= 8.0; x += 0.5) {
        const double base = 1.0 + 0.35 * (x - 1.0);
        const double rate = x < 4.0 ? base : std::max(base, x - 0.5);
        pts.push_back({std::exp2(-x), rate, base});
    }
    auto raw = pts;
    for (auto& p : raw) p.baseline = std::nan("");
    EXPECT_EQ(detect_sigma(raw).status, DetectionStatus::noise_only);
    const auto d = detect_sigma(pts);
    EXPECT_EQ(d.status, DetectionStatus::detected);
    EXPECT_GT(d.eps1, d.eps2);
}

TEST(DetectSigma, EdgesNeedNotStartAtTheEnds) {
    // the coarsest point is already rising; the plateau edge is the last flat point
    const std::vector<RatePoint> pts{{0.5, 1.0}, {0.25, 1.3}, {0.125, 1.35}, {0.0625, 1.4},
                                     {0.03125, 2.4}, {0.015625, 3.4}, {0.0078125, 4.4}, {0.00390625, 4.6}};
    const auto d = detect_sigma(pts);
    EXPECT_EQ(d.status, DetectionStatus::detected);
    EXPECT_EQ(d.eps1, 0.125);
    EXPECT_EQ(d.eps2, 0.03125);
}

TEST(DetectSigma, CrossedEdgesAreUndetermined) {
    const std::vector<RatePoint> pts{{0.5, 1.0}, {0.25, 2.0}, {0.125, 3.0}, {0.0625, 3.0}, {0.03125, 3.0}};
    const auto d = detect_sigma(pts);
    EXPECT_EQ(d.status, DetectionStatus::undetermined);
    EXPECT_EQ(d.eps1, 0.03125);
    EXPECT_EQ(d.eps2, 0.5);
}

TEST(DetectSigma, UnorderedInputIsSorted) {
    auto pts = dense([](double e) { return std::max(1.0, -std::log2(e)); });
    std::reverse(pts.begin(), pts.end());
    EXPECT_EQ(detect_sigma(pts).status, DetectionStatus::detected);
}

TEST(LocalSlopes, CentralDifferences) {
    const std::vector<RatePoint> pts{{0.5, 1.0}, {0.25, 1.0}, {0.125, 2.0}, {0.0625, 4.0}};
    const auto s = local_slopes(pts);
    ASSERT_EQ(s.size(), 4U);
    EXPECT_DOUBLE_EQ(s[0], 0.0);
    EXPECT_DOUBLE_EQ(s[1], 0.5);
    EXPECT_DOUBLE_EQ(s[2], 1.5);
    EXPECT_DOUBLE_EQ(s[3], 2.0);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 7, [&](std::size_t i) { ++hits[i]; });
    EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 1000);
    parallel_for(0, 3, [&](std::size_t) { FAIL(); });
}

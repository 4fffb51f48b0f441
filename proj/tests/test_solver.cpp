#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "icd/dataset.hpp"
#include "icd/denoiser.hpp"
#include "icd/rng.hpp"
#include "icd/schedule.hpp"
#include "icd/solver.hpp"

using namespace icd;

namespace {

// net with non-trivial output everywhere (the default head starts at zero)
Denoiser random_net(bool guidance, uint64_t seed) {
    DenoiserConfig dc;
    dc.hidden = 32;
    dc.time_dim = 8;
    dc.class_dim = 4;
    dc.guidance_dim = 4;
    dc.num_classes = 8;
    dc.has_guidance = guidance;
    if (guidance) dc.w_set = {1.0, 8.0, 12.0, 16.0, 20.0};
    Denoiser d = Denoiser::create(dc, Rng(seed));
    Rng r(seed + 1);
    r.fill_normal(d.weights.back().data.data(), d.weights.back().numel());
    r.fill_normal(d.biases.back().data.data(), d.biases.back().numel());
    return d;
}

Tensor randn(std::vector<int64_t> shape, uint64_t seed) {
    Tensor t(shape);
    Rng rng(seed);
    rng.fill_normal(t.data.data(), t.numel());
    return t;
}

}  // namespace

TEST_CASE("dynamic_w: constant, step, and ramp forms") {
    const GuidanceSchedule c = GuidanceSchedule::constant_w(8.0);
    CHECK(dynamic_w(c, 0, 1000) == 8.0);
    CHECK(dynamic_w(c, 999, 1000) == 8.0);

    const GuidanceSchedule s = GuidanceSchedule::step_w(8.0, 0.8);
    CHECK(dynamic_w(s, 999, 1000) == 1.0);  // 0.999 > 0.8: unguided
    CHECK(dynamic_w(s, 801, 1000) == 1.0);
    CHECK(dynamic_w(s, 800, 1000) == 8.0);  // at the switch point: guided
    CHECK(dynamic_w(s, 19, 1000) == 8.0);

    const GuidanceSchedule r = GuidanceSchedule::ramp_w(9.0, 0.5, 0.9);
    CHECK(dynamic_w(r, 950, 1000) == 1.0);
    CHECK(dynamic_w(r, 900, 1000) == 1.0);
    CHECK(dynamic_w(r, 700, 1000) == doctest::Approx(5.0));  // midpoint of the ramp
    CHECK(dynamic_w(r, 500, 1000) == 9.0);
    CHECK(dynamic_w(r, 100, 1000) == 9.0);

    GuidanceSchedule bad = GuidanceSchedule::ramp_w(8.0, 0.9, 0.5);
    CHECK_THROWS_AS(dynamic_w(bad, 700, 1000), std::invalid_argument);
}

TEST_CASE("two-pass guidance: evaluation counts and affine combination") {
    const Denoiser den = random_net(false, 7);
    const NoiseSchedule sc = make_schedule(49);
    const Tensor x = randn({5, 2}, 11);
    const std::vector<int> cls = {0, 1, 2, 3, 4};
    const std::vector<int> null_cls(5, kNullClass);

    den.eval_count = 0;
    const Tensor e1 = cfg_epsilon(den, x, 519, cls, 1.0);
    CHECK(den.eval_count == 1);  // single pass when w == 1

    den.eval_count = 0;
    const Tensor e8 = cfg_epsilon(den, x, 519, cls, 8.0);
    CHECK(den.eval_count == 2);  // conditional and null passes

    const Tensor ec = den.eps(x, 519, cls);
    const Tensor eu = den.eps(x, 519, null_cls);
    for (int64_t i = 0; i < e8.numel(); ++i) {
        CHECK(e1.data[i] == ec.data[i]);  // w=1 is the conditional prediction
        CHECK(e8.data[i] == doctest::Approx(eu.data[i] + 8.0 * (ec.data[i] - eu.data[i])));
    }

    // w = 0 collapses to the unconditional prediction exactly
    const Tensor e0 = cfg_epsilon(den, x, 519, cls, 0.0);
    for (int64_t i = 0; i < e0.numel(); ++i) CHECK(e0.data[i] == eu.data[i]);
}

TEST_CASE("guidance-embedded model: one evaluation at any scale") {
    const Denoiser den = random_net(true, 13);
    const EmbeddedCfg nm(den);
    const Tensor x = randn({4, 2}, 17);
    const std::vector<int> cls = {0, 1, 2, 3};

    den.eval_count = 0;
    (void)nm.eps_w(x, 519, cls, 16.0);
    CHECK(den.eval_count == 1);
    CHECK_THROWS_AS((void)nm.eps_w(x, 519, cls, 9.0), std::invalid_argument);  // not embedded

    const EmbeddedCfg snapping(den, /*snap=*/true);
    den.eval_count = 0;
    const Tensor a = snapping.eps_w(x, 519, cls, 9.9);   // nearest is 8
    const Tensor b = nm.eps_w(x, 519, cls, 8.0);
    CHECK(den.eval_count == 2);
    CHECK(bit_equal(a, b));

    CHECK(den.nearest_w_index(10.1) == den.w_index(12.0));
    CHECK(den.nearest_w_index(25.0) == den.w_index(20.0));
    CHECK(den.nearest_w_index(1.0) == den.w_index(1.0));
}

TEST_CASE("solver update is the identity when source equals target") {
    const Denoiser den = random_net(false, 19);
    const TeacherCfg nm(den);
    const NoiseSchedule sc = make_schedule(49);
    const Tensor x = randn({6, 2}, 23);
    const std::vector<int> cls = {0, 1, 2, 3, 4, 5};
    for (int t : sc.grid) {
        const Tensor out = ddim_step(nm, sc, x, t, t, cls, 8.0);
        for (int64_t i = 0; i < x.numel(); ++i) CHECK(out.data[i] == x.data[i]);
    }
}

TEST_CASE("closed-form prediction matches a Monte-Carlo posterior average") {
    const NoiseSchedule sc = make_schedule(49);
    MixtureParams mix;
    const AnalyticEps oracle(mix, sc);

    Tensor x({2, 2});
    x.data = {1.3, -0.4, -2.0, 2.5};
    const std::vector<int> cls = {3, kNullClass};
    const int t = 499;
    const double a = sc.abar(t), ra = std::sqrt(a), rb = std::sqrt(1 - a);

    // E[eps | x_t] by importance-weighting mixture draws with the noise kernel
    Rng rng(31);
    const int n = 200000;
    double num[2][2] = {}, den[2] = {};
    for (int i = 0; i < n; ++i) {
        const int mode = static_cast<int>(rng.uniform_int(mix.k));
        const auto c = mix.center(mode);
        const double x0x = c[0] + mix.sigma * rng.normal();
        const double x0y = c[1] + mix.sigma * rng.normal();
        for (int row = 0; row < 2; ++row) {
            if (cls[row] != kNullClass && cls[row] != mode) continue;
            const double dx = x.at(row, 0) - ra * x0x, dy = x.at(row, 1) - ra * x0y;
            const double wgt = std::exp(-(dx * dx + dy * dy) / (2 * (1 - a)));
            num[row][0] += wgt * dx / rb;
            num[row][1] += wgt * dy / rb;
            den[row] += wgt;
        }
    }
    const Tensor pred = analytic_epsilon(mix, sc, x, t, cls);
    for (int row = 0; row < 2; ++row) {
        REQUIRE(den[row] > 0);
        CHECK(pred.at(row, 0) == doctest::Approx(num[row][0] / den[row]).epsilon(0.02));
        CHECK(pred.at(row, 1) == doctest::Approx(num[row][1] / den[row]).epsilon(0.02));
    }
}

TEST_CASE("oracle roundtrip over the full grid reconstructs the data") {
    const NoiseSchedule sc = make_schedule(49);
    MixtureParams mix;
    const AnalyticEps oracle(mix, sc);
    const Dataset data = sample_dataset(mix, 64, Rng(41).stream(streams::dataset));

    const SolveResult enc = ddim_solve(oracle, sc, data.points, OdeDirection::forward,
                                       data.labels, GuidanceSchedule::unguided());
    const SolveResult dec = ddim_solve(oracle, sc, enc.x, OdeDirection::reverse, data.labels,
                                       GuidanceSchedule::unguided());
    double se = 0;
    for (int64_t i = 0; i < dec.x.numel(); ++i) {
        const double d = dec.x.data[i] - data.points.data[i];
        se += d * d;
    }
    CHECK(se / static_cast<double>(dec.x.numel()) < 5e-3);
}

TEST_CASE("ddim_solve visits the whole grid in order and can record the path") {
    const NoiseSchedule sc = make_schedule(10);
    MixtureParams mix;
    const AnalyticEps oracle(mix, sc);
    const Tensor x = randn({3, 2}, 43);
    const std::vector<int> cls = {0, 1, 2};

    const SolveResult fwd =
        ddim_solve(oracle, sc, x, OdeDirection::forward, cls, GuidanceSchedule::unguided(), true);
    CHECK(fwd.times.size() == sc.grid.size());
    CHECK(fwd.times.front() == sc.grid.front());
    CHECK(fwd.times.back() == sc.grid.back());
    CHECK(fwd.path.size() == sc.grid.size());
    CHECK(bit_equal(fwd.path.front(), x));

    const SolveResult rev = ddim_solve(oracle, sc, fwd.x, OdeDirection::reverse, cls,
                                       GuidanceSchedule::unguided(), true);
    CHECK(rev.times.front() == sc.grid.back());
    CHECK(rev.times.back() == sc.grid.front());
}

TEST_CASE("later guidance switch points cost more reconstruction error") {
    const NoiseSchedule sc = make_schedule(49);
    MixtureParams mix;
    const AnalyticEps oracle(mix, sc);
    const Dataset data = sample_dataset(mix, 48, Rng(47).stream(streams::dataset));

    const auto rows = threshold_sweep(oracle, sc, data, {0.2, 0.6, 1.0}, 8.0);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].mse < rows[1].mse);
    CHECK(rows[1].mse < rows[2].mse);
}

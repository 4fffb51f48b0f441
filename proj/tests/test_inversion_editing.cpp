#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "icd/boundaries.hpp"
#include "icd/dataset.hpp"
#include "icd/denoiser.hpp"
#include "icd/distill.hpp"
#include "icd/editing.hpp"
#include "icd/inversion.hpp"
#include "icd/rng.hpp"
#include "icd/schedule.hpp"
#include "icd/solver.hpp"

using namespace icd;

namespace {

Denoiser random_guided_net(uint64_t seed) {
    DenoiserConfig dc;
    dc.hidden = 32;
    dc.time_dim = 8;
    dc.class_dim = 4;
    dc.guidance_dim = 4;
    dc.num_classes = 8;
    dc.has_guidance = true;
    dc.w_set = {1.0, 8.0};
    Denoiser d = Denoiser::create(dc, Rng(seed));
    Rng r(seed + 1);
    r.fill_normal(d.weights.back().data.data(), d.weights.back().numel());
    for (auto& v : d.delta_w.data) v = 0.05 * r.normal();
    return d;
}

}  // namespace

TEST_CASE("latent log-density matches the closed form") {
    Tensor z0({4, 2});
    CHECK(latent_nll(z0) == doctest::Approx(0.9189385332046727).epsilon(1e-12));
    Tensor z1 = Tensor::full({3, 2}, 1.0);
    CHECK(latent_nll(z1) == doctest::Approx(1.4189385332046727).epsilon(1e-12));
}

TEST_CASE("oracle edge walks invert each other to mode precision") {
    const NoiseSchedule sc = make_schedule(49);
    MixtureParams mix;
    const AnalyticEps oracle(mix, sc);
    const BoundaryPlan plan = make_plan(sc, 4, 0.8);
    Rng rng(7);

    Tensor x0({64, 2});
    std::vector<int> cls;
    sample_batch(mix, 64, rng, x0, cls);

    const Tensor z = encode_with(oracle, sc, plan, x0, cls);
    // latents near standard normal: a wildly off encode would blow this up
    CHECK(latent_nll(z) < 2.5);

    const Tensor back = decode_with(oracle, sc, plan, z, cls, GuidanceSchedule::unguided());
    double mse = 0;
    int keep = 0;
    for (int i = 0; i < 64; ++i) {
        const double dx = back.at(i, 0) - x0.at(i, 0);
        const double dy = back.at(i, 1) - x0.at(i, 1);
        mse += (dx * dx + dy * dy) / 2.0;
        keep += nearest_mode(mix, back.at(i, 0), back.at(i, 1)) == cls[static_cast<size_t>(i)];
    }
    mse /= 64.0;
    CHECK(mse < 0.1);        // coarse four-segment walk, not the fine solver
    CHECK(keep >= 58);       // >= 90% stay in their own mode
}

TEST_CASE("edge walks match a hand-rolled step sequence") {
    const NoiseSchedule sc = make_schedule(49);
    MixtureParams mix;
    const AnalyticEps oracle(mix, sc);
    const BoundaryPlan plan = make_plan(sc, 4, 0.7);
    Rng rng(9);

    Tensor x0({8, 2});
    std::vector<int> cls;
    sample_batch(mix, 8, rng, x0, cls);

    Tensor manual = x0;
    for (int i = 0; i < plan.m; ++i)
        manual = ddim_step(oracle, sc, manual, plan.edges[i], plan.edges[i + 1], cls, 1.0);
    const Tensor z = encode_with(oracle, sc, plan, x0, cls);
    CHECK(bit_equal(z, manual));

    const GuidanceSchedule g = GuidanceSchedule::step_w(8.0, 0.7);
    Tensor down = z;
    for (int i = plan.m; i > 0; --i) {
        const double w = dynamic_w(g, plan.edges[i], sc.t_max);
        down = ddim_step(oracle, sc, down, plan.edges[i], plan.edges[i - 1], cls, w);
    }
    const Tensor dec = decode_with(oracle, sc, plan, z, cls, g);
    CHECK(bit_equal(dec, down));
}

TEST_CASE("encode and decode reject students pointed the wrong way") {
    const NoiseSchedule sc = make_schedule(49);
    const BoundaryPlan plan = make_plan(sc, 2);
    const Denoiser den = random_guided_net(11);
    const ConsistencyModel cd{den, OdeDirection::reverse, plan};
    const ConsistencyModel fcd{den, OdeDirection::forward, plan};
    const Tensor x = Tensor::zeros({2, 2});
    const std::vector<int> cls = {0, 1};

    CHECK_THROWS_AS(encode(cd, sc, x, cls), std::invalid_argument);
    CHECK_THROWS_AS(decode(fcd, sc, x, cls, GuidanceSchedule::unguided()),
                    std::invalid_argument);
    CHECK_NOTHROW(encode(fcd, sc, x, cls));
    CHECK_NOTHROW(decode(cd, sc, x, cls, GuidanceSchedule::unguided()));
}

TEST_CASE("encode records the edge path in order") {
    const NoiseSchedule sc = make_schedule(49);
    const BoundaryPlan plan = make_plan(sc, 4, 0.8);
    const ConsistencyModel fcd{random_guided_net(13), OdeDirection::forward, plan};
    Tensor x = Tensor::zeros({2, 2});
    x.at(0, 0) = 1.0;
    const std::vector<int> cls = {0, 1};

    std::vector<Tensor> path;
    const Tensor z = encode(fcd, sc, x, cls, &path);
    REQUIRE(path.size() == 5);  // one state per edge, 19 .. 999
    CHECK(bit_equal(path.front(), x));
    CHECK(bit_equal(path.back(), z));
}

TEST_CASE("roundtrip evaluation wires students together and checks plans") {
    const NoiseSchedule sc = make_schedule(49);
    const BoundaryPlan plan = make_plan(sc, 4, 0.8);
    const Denoiser den = random_guided_net(17);
    const ConsistencyModel cd{den, OdeDirection::reverse, plan};
    const ConsistencyModel fcd{den, OdeDirection::forward, plan};

    MixtureParams mix;
    Rng rng(18);
    Dataset data = sample_dataset(mix, 16, rng);
    const RoundtripReport rep = roundtrip_eval(fcd, cd, sc, data,
                                               GuidanceSchedule::unguided());
    CHECK(rep.count == 16);
    CHECK(std::isfinite(rep.mse));
    CHECK(std::isfinite(rep.nll));

    const BoundaryPlan other = make_plan(sc, 2);
    const ConsistencyModel cd2{den, OdeDirection::reverse, other};
    CHECK_THROWS_AS(roundtrip_eval(fcd, cd2, sc, data, GuidanceSchedule::unguided()),
                    std::invalid_argument);
}

TEST_CASE("editing through nets is deterministic run to run") {
    const NoiseSchedule sc = make_schedule(49);
    const BoundaryPlan plan = make_plan(sc, 4, 0.8);
    const Denoiser den = random_guided_net(19);
    const ConsistencyModel cd{den, OdeDirection::reverse, plan};
    const ConsistencyModel fcd{den, OdeDirection::forward, plan};

    Tensor x({4, 2});
    Rng rng(20);
    rng.fill_normal(x.data.data(), x.numel());
    const std::vector<int> src = {0, 1, 2, 3};
    const std::vector<int> tgt = {2, 3, 4, 5};
    const GuidanceSchedule g = GuidanceSchedule::step_w(8.0, 0.8);
    const Tensor e1 = edit_points(fcd, cd, sc, x, src, tgt, g);
    const Tensor e2 = edit_points(fcd, cd, sc, x, src, tgt, g);
    CHECK(bit_equal(e1, e2));
    CHECK(e1.rows() == 4);
    CHECK(e1.cols() == 2);
}

TEST_CASE("oracle editing lands points in the requested mode") {
    const NoiseSchedule sc = make_schedule(49);
    MixtureParams mix;
    const AnalyticEps oracle(mix, sc);
    const BoundaryPlan plan = make_plan(sc, 4, 0.8);
    Rng rng(23);

    const int n = 48;
    Tensor x0({n, 2});
    std::vector<int> src;
    sample_batch(mix, n, rng, x0, src);
    std::vector<int> tgt(src.size());
    for (size_t i = 0; i < src.size(); ++i) tgt[i] = (src[i] + 2) % mix.k;

    const Tensor z = encode_with(oracle, sc, plan, x0, src);
    const Tensor ed = decode_with(oracle, sc, plan, z, tgt,
                                  GuidanceSchedule::step_w(8.0, 0.8));
    int hit = 0;
    for (int i = 0; i < n; ++i)
        hit += nearest_mode(mix, ed.at(i, 0), ed.at(i, 1)) == tgt[static_cast<size_t>(i)];
    CHECK(hit >= n * 85 / 100);
}

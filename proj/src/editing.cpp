#include "icd/editing.hpp"

#include <cmath>
#include <stdexcept>

namespace icd {

Tensor edit_points(const ConsistencyModel& fcd, const ConsistencyModel& cd,
                   const NoiseSchedule& sc, const Tensor& x0, const std::vector<int>& src,
                   const std::vector<int>& tgt, const GuidanceSchedule& g) {
    if (!fcd.plan.same_layout(cd.plan))
        throw std::invalid_argument("edit: students use different boundary plans");
    if (src.size() != static_cast<size_t>(x0.rows()) || tgt.size() != src.size())
        throw std::invalid_argument("edit: one source and target class per row required");
    Tensor z = encode(fcd, sc, x0, src);
    return decode(cd, sc, z, tgt, g);
}

EditReport edit_eval(const ConsistencyModel& fcd, const ConsistencyModel& cd,
                     const NoiseSchedule& sc, const MixtureParams& mix, int64_t count, int shift,
                     const GuidanceSchedule& g, Rng rng, EditDump* dump) {
    if (count < 1) throw std::invalid_argument("edit_eval: count must be positive");
    Rng data = rng.stream(streams::eval);
    Tensor x0({count, 2});
    std::vector<int> src;
    sample_batch(mix, count, data, x0, src);
    std::vector<int> tgt(src.size());
    for (size_t i = 0; i < src.size(); ++i)
        tgt[i] = (src[i] + (shift % mix.k) + mix.k) % mix.k;

    Tensor edits = edit_points(fcd, cd, sc, x0, src, tgt, g);

    // independent-resampling reference: decode a fresh prior latent with the
    // same target class and schedule; an edit that reuses the input's latent
    // should land closer to the input than this does
    Tensor zf({count, 2});
    Rng noise = rng.stream(streams::sampler);
    noise.fill_normal(zf);
    Tensor fresh = decode(cd, sc, zf, tgt, g);

    EditReport rep;
    rep.count = count;
    int64_t hits = 0, fresh_hits = 0;
    double move = 0, base = 0, fmove = 0;
    // angular offsets relative to each point's own mode center
    std::vector<double> a_in(count), a_out(count);
    for (int64_t i = 0; i < count; ++i) {
        const double ex = edits.at(i, 0), ey = edits.at(i, 1);
        if (nearest_mode(mix, ex, ey) == tgt[i]) ++hits;
        const double dx = ex - x0.at(i, 0), dy = ey - x0.at(i, 1);
        move += std::hypot(dx, dy);

        const auto cs = mix.center(src[i]);
        const auto ct = mix.center(tgt[i]);
        const double fx = ct[0] + mix.sigma * data.normal();
        const double fy = ct[1] + mix.sigma * data.normal();
        base += std::hypot(fx - x0.at(i, 0), fy - x0.at(i, 1));
        if (nearest_mode(mix, fresh.at(i, 0), fresh.at(i, 1)) == tgt[i]) ++fresh_hits;
        fmove += std::hypot(fresh.at(i, 0) - x0.at(i, 0), fresh.at(i, 1) - x0.at(i, 1));
        a_in[i] = std::atan2(x0.at(i, 1) - cs[1], x0.at(i, 0) - cs[0]);
        a_out[i] = std::atan2(ey - ct[1], ex - ct[0]);
    }
    rep.success = static_cast<double>(hits) / static_cast<double>(count);
    rep.mean_move = move / static_cast<double>(count);
    rep.baseline_move = base / static_cast<double>(count);
    rep.fresh_move = fmove / static_cast<double>(count);
    rep.fresh_success = static_cast<double>(fresh_hits) / static_cast<double>(count);

    double mi = 0, mo = 0;
    for (int64_t i = 0; i < count; ++i) {
        mi += a_in[i];
        mo += a_out[i];
    }
    mi /= static_cast<double>(count);
    mo /= static_cast<double>(count);
    double sio = 0, sii = 0, soo = 0;
    for (int64_t i = 0; i < count; ++i) {
        sio += (a_in[i] - mi) * (a_out[i] - mo);
        sii += (a_in[i] - mi) * (a_in[i] - mi);
        soo += (a_out[i] - mo) * (a_out[i] - mo);
    }
    rep.angle_corr = sii > 0 && soo > 0 ? sio / std::sqrt(sii * soo) : 0.0;

    if (dump) {
        dump->inputs = x0;
        dump->edits = edits;
        dump->src = src;
        dump->tgt = tgt;
    }
    return rep;
}

}  // namespace icd

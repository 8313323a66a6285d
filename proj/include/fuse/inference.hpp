#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "fuse/network.hpp"
#include "fuse/training.hpp"

namespace fuse {

struct HomotopyScore {
    double f_g;  // calibrated global score
    double f_l;  // calibrated local score
    double t;
    double f;  // (1-t) f_g + t f_l
};

namespace detail {

// Both calibrated heads from one shared forward pass.
inline void calibrated_heads(const TrainedModel& model, const Matrix& z,
                             std::vector<double>& fg, std::vector<double>& fl) {
    const Matrix features = forward_features(model.params, z);
    const double span = std::max(model.q99 - model.q01, 1e-12);
    fg.resize(z.rows);
    fl.resize(z.rows);
    const std::size_t q = model.params.q;
    for (std::size_t i = 0; i < z.rows; ++i) {
        const double* frow = features.row(i);
        double g = model.params.bg, l = model.params.bl;
        for (std::size_t k = 0; k < q; ++k) {
            g += model.params.wg[k] * frow[k];
            l += model.params.wl[k] * frow[k];
        }
        fg[i] = stable_sigmoid(g);
        fl[i] = std::clamp((l - model.q01) / span, 0.0, 1.0);
    }
}

}  // namespace detail

// Sigmoid-calibrated global score per row.
inline std::vector<double> score_global(const TrainedModel& model, const Matrix& z) {
    auto logits = global_logit(model.params, z);
    for (double& v : logits) v = stable_sigmoid(v);
    return logits;
}

// Local potential rescaled between the frozen calibration quantiles and
// clipped to [0, 1]. A degenerate quantile gap is floored at 1e-12.
inline std::vector<double> score_local(const TrainedModel& model, const Matrix& z) {
    auto values = local_potential(model.params, z);
    const double span = std::max(model.q99 - model.q01, 1e-12);
    for (double& v : values) v = std::clamp((v - model.q01) / span, 0.0, 1.0);
    return values;
}

inline std::vector<HomotopyScore> score(const TrainedModel& model, const Matrix& z, double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw parameter_error("score: homotopy parameter t must lie in [0,1]");
    std::vector<double> fg, fl;
    detail::calibrated_heads(model, z, fg, fl);
    std::vector<HomotopyScore> out(z.rows);
    for (std::size_t i = 0; i < z.rows; ++i)
        out[i] = {fg[i], fl[i], t, (1.0 - t) * fg[i] + t * fl[i]};
    return out;
}

// Batch variant over a t-grid: one forward pass, an n x |ts| score matrix.
// Serves hyperparameter sweeps over t without rescoring.
struct GridScores {
    std::vector<double> f_g;
    std::vector<double> f_l;
    Matrix f;  // rows = samples, cols = t values
};

inline GridScores score_grid(const TrainedModel& model, const Matrix& z,
                             const std::vector<double>& ts) {
    for (double t : ts)
        if (!(t >= 0.0 && t <= 1.0))
            throw parameter_error("score_grid: homotopy parameter t must lie in [0,1]");
    GridScores out;
    detail::calibrated_heads(model, z, out.f_g, out.f_l);
    out.f = Matrix(z.rows, ts.size());
    for (std::size_t i = 0; i < z.rows; ++i)
        for (std::size_t k = 0; k < ts.size(); ++k)
            out.f(i, k) = (1.0 - ts[k]) * out.f_g[i] + ts[k] * out.f_l[i];
    return out;
}

}  // namespace fuse

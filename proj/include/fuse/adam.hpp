#pragma once

#include <cmath>
#include <cstddef>

#include "fuse/network.hpp"

namespace fuse {

// Adam with bias correction, no weight decay. One shared state covers all
// parameters; the alternating global/local updates both step through it.
struct AdamState {
    FuseParams m;  // first moments
    FuseParams v;  // second moments
    std::size_t step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState() = default;
    AdamState(std::size_t p, std::size_t q, double lr_ = 1e-3)
        : m(p, q), v(p, q), lr(lr_) {}
};

inline void adam_step(FuseParams& params, AdamState& state, const FuseParams& grad) {
    require(params.p == grad.p && params.q == grad.q && params.p == state.m.p &&
                params.q == state.m.q,
            "adam_step: shape mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    auto update = [&](std::span<double> theta, std::span<double> m, std::span<double> v,
                      std::span<const double> g) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            theta[i] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    };

    // Walk the four structures in lockstep through the canonical span order.
    std::vector<std::span<double>> ts, ms, vs;
    std::vector<std::span<const double>> gs;
    FuseParams::visit(params, [&](std::span<double> sp) { ts.push_back(sp); });
    FuseParams::visit(state.m, [&](std::span<double> sp) { ms.push_back(sp); });
    FuseParams::visit(state.v, [&](std::span<double> sp) { vs.push_back(sp); });
    FuseParams::visit(const_cast<FuseParams&>(grad),
                      [&](std::span<double> sp) { gs.push_back(sp); });
    for (std::size_t k = 0; k < ts.size(); ++k) update(ts[k], ms[k], vs[k], gs[k]);
}

}  // namespace fuse

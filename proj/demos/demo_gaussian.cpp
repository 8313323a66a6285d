// Minimal end-to-end walkthrough: train on a 2-D Gaussian, then sweep the
// homotopy parameter at a few probe points.

#include <cstdio>

#include "fuse/fuse.hpp"

int main() {
    fuse::SyntheticSpec spec;
    spec.family = fuse::Family::Normal;
    spec.n = 800;
    spec.d = 2;
    spec.seed = 7;
    const auto data = fuse::gen_synthetic(spec);

    fuse::TrainConfig cfg;
    cfg.epochs = 15;
    cfg.seed = 7;
    const fuse::TrainedModel model = fuse::train(data.samples, cfg);

    fuse::Matrix probes(3, 2);
    probes(1, 0) = 1.0;
    probes(2, 0) = 3.0;  // origin, mid, far out

    std::printf("%8s %8s %8s %8s %8s\n", "x", "t=0", "t=0.5", "t=1", "f_g");
    for (std::size_t i = 0; i < probes.rows; ++i) {
        fuse::Matrix one(1, 2);
        one(0, 0) = probes(i, 0);
        one(0, 1) = probes(i, 1);
        const auto s0 = fuse::score(model, one, 0.0)[0];
        const auto s5 = fuse::score(model, one, 0.5)[0];
        const auto s1 = fuse::score(model, one, 1.0)[0];
        std::printf("%8.2f %8.4f %8.4f %8.4f %8.4f\n", probes(i, 0), s0.f, s5.f, s1.f,
                    s0.f_g);
    }
    return 0;
}

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "fuse/common.hpp"
#include "fuse/matrix.hpp"
#include "fuse/rng.hpp"

namespace fuse {

// ---------------------------------------------------------------------------
// GELU, tanh form, with closed-form first and second derivatives. The second
// derivative is what makes the score-matching gradient expressible without a
// general autodiff tape.
// ---------------------------------------------------------------------------

namespace detail {
inline constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
inline constexpr double kGeluA = 0.044715;

// tanh(u) = 1 - 2/(1 + e^{2u}), within 2 ulp of std::tanh and roughly twice
// as fast with this libm. Saturates exactly beyond |u| > 20.
inline double fast_tanh(double u) {
    if (u > 20.0) return 1.0;
    if (u < -20.0) return -1.0;
    return 1.0 - 2.0 / (1.0 + std::exp(2.0 * u));
}
}  // namespace detail

inline double gelu(double x) {
    const double u = detail::kGeluC * (x + detail::kGeluA * x * x * x);
    return 0.5 * x * (1.0 + detail::fast_tanh(u));
}

inline double gelu_d1(double x) {
    const double u = detail::kGeluC * (x + detail::kGeluA * x * x * x);
    const double t = detail::fast_tanh(u);
    const double du = detail::kGeluC * (1.0 + 3.0 * detail::kGeluA * x * x);
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

inline double gelu_d2(double x) {
    const double u = detail::kGeluC * (x + detail::kGeluA * x * x * x);
    const double t = detail::fast_tanh(u);
    const double sech2 = 1.0 - t * t;
    const double du = detail::kGeluC * (1.0 + 3.0 * detail::kGeluA * x * x);
    const double ddu = detail::kGeluC * 6.0 * detail::kGeluA * x;
    return sech2 * du + 0.5 * x * sech2 * (ddu - 2.0 * t * du * du);
}

// Overflow-safe logistic sigmoid.
inline double stable_sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

// log(1 + e^x) without overflow.
inline double softplus(double x) {
    if (x > 35.0) return x;
    if (x < -35.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

// ---------------------------------------------------------------------------
// Parameters of the fixed architecture: shared encoder (two GELU layers of
// width q plus a linear projection to q) and two scalar linear heads.
// ---------------------------------------------------------------------------

struct FuseParams {
    std::size_t p = 0;  // input dimension
    std::size_t q = 0;  // hidden / feature width

    Matrix w1;               // q x p
    std::vector<double> b1;  // q
    Matrix w2;               // q x q
    std::vector<double> b2;  // q
    Matrix w3;               // q x q, linear projection
    std::vector<double> b3;  // q
    std::vector<double> wg;  // q, global head
    double bg = 0.0;
    std::vector<double> wl;  // q, local head
    double bl = 0.0;

    FuseParams() = default;
    FuseParams(std::size_t p_, std::size_t q_)
        : p(p_), q(q_), w1(q_, p_), b1(q_, 0.0), w2(q_, q_), b2(q_, 0.0), w3(q_, q_),
          b3(q_, 0.0), wg(q_, 0.0), wl(q_, 0.0) {}

    // Flat coordinate views in a fixed order; gradients and optimizer state
    // iterate through these.
    template <typename Self, typename Fn>
    static void visit(Self& s, Fn&& fn) {
        fn(std::span(s.w1.data));
        fn(std::span(s.b1));
        fn(std::span(s.w2.data));
        fn(std::span(s.b2));
        fn(std::span(s.w3.data));
        fn(std::span(s.b3));
        fn(std::span(s.wg));
        fn(std::span(&s.bg, 1));
        fn(std::span(s.wl));
        fn(std::span(&s.bl, 1));
    }

    std::size_t coordinate_count() const {
        std::size_t n = 0;
        visit(*const_cast<FuseParams*>(this), [&](auto sp) { n += sp.size(); });
        return n;
    }

    bool all_finite() const {
        bool ok = true;
        visit(*const_cast<FuseParams*>(this),
              [&](auto sp) { for (double v : sp) ok = ok && std::isfinite(v); });
        return ok;
    }
};

inline FuseParams zeros_like(const FuseParams& ref) { return FuseParams(ref.p, ref.q); }

// Glorot-uniform weights, zero biases. The bound per layer is
// sqrt(6 / (fan_in + fan_out)).
inline FuseParams init_params(Rng& rng, std::size_t p, std::size_t q) {
    require(p >= 1 && q >= 1, "init_params: p and q must be >= 1");
    FuseParams params(p, q);
    auto fill = [&](Matrix& w, std::size_t fan_in, std::size_t fan_out) {
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& v : w.data) v = rng.uniform(-a, a);
    };
    fill(params.w1, p, q);
    fill(params.w2, q, q);
    fill(params.w3, q, q);
    const double ah = std::sqrt(6.0 / static_cast<double>(q + 1));
    for (double& v : params.wg) v = rng.uniform(-ah, ah);
    for (double& v : params.wl) v = rng.uniform(-ah, ah);
    return params;
}

// Cached intermediates of one forward pass; valid only for the parameter
// values it was recorded with.
struct ForwardTape {
    Matrix z;   // n x p input
    Matrix a1;  // n x q pre-activations, layer 1
    Matrix h1;  // n x q
    Matrix a2;  // n x q pre-activations, layer 2
    Matrix h2;  // n x q
    Matrix f;   // n x q encoder features
};

namespace detail {

inline void add_row_broadcast(Matrix& m, const std::vector<double>& b) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* row = m.row(i);
        for (std::size_t j = 0; j < m.cols; ++j) row[j] += b[j];
    }
}

template <typename Fn>
Matrix apply(const Matrix& m, Fn&& fn) {
    Matrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = fn(m.data[i]);
    return out;
}

}  // namespace detail

// Encoder forward pass over a batch: f = W3 gelu(W2 gelu(W1 z + b1) + b2) + b3.
inline std::pair<Matrix, ForwardTape> encode(const FuseParams& params, const Matrix& z) {
    require(z.cols == params.p, "encode: input has " + std::to_string(z.cols) +
                                    " columns, model expects " + std::to_string(params.p));
    ForwardTape tape;
    tape.z = z;
    tape.a1 = matmul_nt(z, params.w1);
    detail::add_row_broadcast(tape.a1, params.b1);
    tape.h1 = detail::apply(tape.a1, [](double x) { return gelu(x); });
    tape.a2 = matmul_nt(tape.h1, params.w2);
    detail::add_row_broadcast(tape.a2, params.b2);
    tape.h2 = detail::apply(tape.a2, [](double x) { return gelu(x); });
    tape.f = matmul_nt(tape.h2, params.w3);
    detail::add_row_broadcast(tape.f, params.b3);
    return {tape.f, tape};
}

// Features only, without the tape; the inference path.
inline Matrix forward_features(const FuseParams& params, const Matrix& z) {
    require(z.cols == params.p, "forward: input has " + std::to_string(z.cols) +
                                    " columns, model expects " + std::to_string(params.p));
    Matrix h = matmul_nt(z, params.w1);
    detail::add_row_broadcast(h, params.b1);
    for (double& v : h.data) v = gelu(v);
    Matrix h2 = matmul_nt(h, params.w2);
    detail::add_row_broadcast(h2, params.b2);
    for (double& v : h2.data) v = gelu(v);
    Matrix f = matmul_nt(h2, params.w3);
    detail::add_row_broadcast(f, params.b3);
    return f;
}

inline std::vector<double> head_values(const Matrix& features, const std::vector<double>& w,
                                       double b) {
    std::vector<double> out(features.rows);
    for (std::size_t i = 0; i < features.rows; ++i)
        out[i] = dot(features.row(i), w.data(), features.cols) + b;
    return out;
}

inline std::vector<double> global_logit(const FuseParams& params, const Matrix& z) {
    return head_values(forward_features(params, z), params.wg, params.bg);
}

inline std::vector<double> local_potential(const FuseParams& params, const Matrix& z) {
    return head_values(forward_features(params, z), params.wl, params.bl);
}

// Intermediates of the input-gradient pass; reused by the second-order
// backward pass of the score-matching loss.
struct ScoreTape {
    std::vector<double> v3;  // W3^T wl
    Matrix d2;               // gelu'(a2) o v3
    Matrix v2;               // per row: W2^T d2
    Matrix d1;               // gelu'(a1) o v2
    Matrix s;                // n x p input gradients
};

inline ScoreTape score_pass(const FuseParams& params, const ForwardTape& tape) {
    const std::size_t n = tape.z.rows, q = params.q;
    ScoreTape st;
    st.v3.assign(q, 0.0);
    for (std::size_t k = 0; k < q; ++k) {
        const double* w3row = params.w3.row(k);
        for (std::size_t j = 0; j < q; ++j) st.v3[j] += w3row[j] * params.wl[k];
    }
    st.d2 = Matrix(n, q);
    for (std::size_t i = 0; i < n; ++i) {
        const double* a2row = tape.a2.row(i);
        double* d2row = st.d2.row(i);
        for (std::size_t j = 0; j < q; ++j) d2row[j] = gelu_d1(a2row[j]) * st.v3[j];
    }
    st.v2 = matmul(st.d2, params.w2);
    st.d1 = Matrix(n, q);
    for (std::size_t i = 0; i < n; ++i) {
        const double* a1row = tape.a1.row(i);
        const double* v2row = st.v2.row(i);
        double* d1row = st.d1.row(i);
        for (std::size_t j = 0; j < q; ++j) d1row[j] = gelu_d1(a1row[j]) * v2row[j];
    }
    st.s = matmul(st.d1, params.w1);
    return st;
}

// Gradient of the local potential with respect to the input, one row per
// sample: s(z) = d l(z) / d z.
inline Matrix input_score(const FuseParams& params, const Matrix& z) {
    auto [features, tape] = encode(params, z);
    return score_pass(params, tape).s;
}

// ---------------------------------------------------------------------------
// Loss gradients. Both return the scalar loss together with a full
// FuseParams-shaped gradient; coordinates of the untouched head stay zero.
// ---------------------------------------------------------------------------

struct LossGrad {
    double loss = 0.0;
    FuseParams grad;
};

namespace detail {

// Backpropagates per-sample head adjoints `coef` through one recorded tape
// into `grad`. `head_w` selects which head the adjoint enters through.
inline void backprop_head(const FuseParams& params, const ForwardTape& tape,
                          const std::vector<double>& coef, const std::vector<double>& head_w,
                          std::vector<double>& grad_head_w, double& grad_head_b,
                          FuseParams& grad) {
    const std::size_t n = tape.z.rows, q = params.q;
    double coef_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = coef[i];
        coef_sum += c;
        const double* frow = tape.f.row(i);
        for (std::size_t j = 0; j < q; ++j) grad_head_w[j] += c * frow[j];
    }
    grad_head_b += coef_sum;

    Matrix fbar(n, q);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = fbar.row(i);
        for (std::size_t j = 0; j < q; ++j) row[j] = coef[i] * head_w[j];
    }
    {
        Matrix w3g = matmul_tn(fbar, tape.h2);
        for (std::size_t i = 0; i < w3g.data.size(); ++i) grad.w3.data[i] += w3g.data[i];
        auto b3g = column_sums(fbar);
        for (std::size_t j = 0; j < q; ++j) grad.b3[j] += b3g[j];
    }
    Matrix h2bar = matmul(fbar, params.w3);
    Matrix a2bar(n, q);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < q; ++j)
            a2bar(i, j) = gelu_d1(tape.a2(i, j)) * h2bar(i, j);
    {
        Matrix w2g = matmul_tn(a2bar, tape.h1);
        for (std::size_t i = 0; i < w2g.data.size(); ++i) grad.w2.data[i] += w2g.data[i];
        auto b2g = column_sums(a2bar);
        for (std::size_t j = 0; j < q; ++j) grad.b2[j] += b2g[j];
    }
    Matrix h1bar = matmul(a2bar, params.w2);
    Matrix a1bar(n, q);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < q; ++j)
            a1bar(i, j) = gelu_d1(tape.a1(i, j)) * h1bar(i, j);
    {
        Matrix w1g = matmul_tn(a1bar, tape.z);
        for (std::size_t i = 0; i < w1g.data.size(); ++i) grad.w1.data[i] += w1g.data[i];
        auto b1g = column_sums(a1bar);
        for (std::size_t j = 0; j < q; ++j) grad.b1[j] += b1g[j];
    }
}

}  // namespace detail

// Mini-batch mean of the pairwise cross-entropy ranking loss and its exact
// gradient. Targets are empirical preferences in [0, 1]; the local head
// receives no gradient.
inline LossGrad grad_global_loss(const FuseParams& params, const Matrix& z_first,
                                 const Matrix& z_second, const std::vector<double>& targets) {
    require(z_first.rows == z_second.rows && z_first.rows == targets.size(),
            "grad_global_loss: pair/target counts disagree");
    require(z_first.rows > 0, "grad_global_loss: empty batch");
    for (double t : targets)
        if (!(t >= 0.0 && t <= 1.0))
            throw contract_error("grad_global_loss: target outside [0,1]");

    const std::size_t m = z_first.rows;
    auto [f1, tape1] = encode(params, z_first);
    auto [f2, tape2] = encode(params, z_second);
    auto g1 = head_values(f1, params.wg, params.bg);
    auto g2 = head_values(f2, params.wg, params.bg);

    LossGrad out;
    out.grad = zeros_like(params);
    std::vector<double> coef1(m), coef2(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double delta = g1[i] - g2[i];
        out.loss += targets[i] * softplus(-delta) + (1.0 - targets[i]) * softplus(delta);
        const double c = (stable_sigmoid(delta) - targets[i]) / static_cast<double>(m);
        coef1[i] = c;
        coef2[i] = -c;
    }
    out.loss /= static_cast<double>(m);

    detail::backprop_head(params, tape1, coef1, params.wg, out.grad.wg, out.grad.bg, out.grad);
    detail::backprop_head(params, tape2, coef2, params.wg, out.grad.wg, out.grad.bg, out.grad);
    return out;
}

// Denoising score-matching loss (1/2n) sum_i |s(z_i + eps_i) + eps_i/eta^2|^2
// and its exact gradient. Differentiating through the input gradient needs a
// second reverse pass over the score computation; the global head receives no
// gradient.
inline LossGrad grad_local_loss(const FuseParams& params, const Matrix& z_noisy,
                                const Matrix& eps, double eta) {
    if (!(eta > 0.0)) throw parameter_error("grad_local_loss: eta must be positive");
    require(z_noisy.rows == eps.rows && z_noisy.cols == eps.cols,
            "grad_local_loss: noisy batch and noise shapes disagree");
    require(z_noisy.rows > 0, "grad_local_loss: empty batch");

    const std::size_t n = z_noisy.rows, q = params.q, p = params.p;
    const double inv_eta2 = 1.0 / (eta * eta);
    const double inv_n = 1.0 / static_cast<double>(n);

    auto [features, tape] = encode(params, z_noisy);
    ScoreTape st = score_pass(params, tape);

    LossGrad out;
    out.grad = zeros_like(params);

    // Residual r_i = (s_i + eps_i/eta^2) / n doubles as the loss integrand
    // and the adjoint seed of the second reverse pass.
    Matrix rmat(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        const double* srow = st.s.row(i);
        const double* erow = eps.row(i);
        double* rrow = rmat.row(i);
        for (std::size_t j = 0; j < p; ++j) {
            const double resid = srow[j] + inv_eta2 * erow[j];
            out.loss += 0.5 * resid * resid;
            rrow[j] = resid * inv_n;
        }
    }
    out.loss *= inv_n;

    // d1bar = W1 r per row.
    Matrix d1bar = matmul_nt(rmat, params.w1);
    {
        Matrix w1g = matmul_tn(st.d1, rmat);  // sum_i d1_i r_i^T
        for (std::size_t i = 0; i < w1g.data.size(); ++i) out.grad.w1.data[i] += w1g.data[i];
    }

    Matrix a1bar(n, q), v2bar(n, q);
    for (std::size_t i = 0; i < n; ++i) {
        const double* a1row = tape.a1.row(i);
        const double* v2row = st.v2.row(i);
        const double* dbrow = d1bar.row(i);
        double* abrow = a1bar.row(i);
        double* vbrow = v2bar.row(i);
        for (std::size_t j = 0; j < q; ++j) {
            abrow[j] = gelu_d2(a1row[j]) * v2row[j] * dbrow[j];
            vbrow[j] = gelu_d1(a1row[j]) * dbrow[j];
        }
    }

    Matrix d2bar = matmul_nt(v2bar, params.w2);  // d2bar_i = W2 v2bar_i
    {
        Matrix w2g = matmul_tn(st.d2, v2bar);  // sum_i d2_i v2bar_i^T
        for (std::size_t i = 0; i < w2g.data.size(); ++i) out.grad.w2.data[i] += w2g.data[i];
    }

    Matrix a2bar(n, q);
    std::vector<double> v3bar_sum(q, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* a2row = tape.a2.row(i);
        const double* dbrow = d2bar.row(i);
        double* abrow = a2bar.row(i);
        for (std::size_t j = 0; j < q; ++j) {
            const double d1v = gelu_d1(a2row[j]);
            abrow[j] = gelu_d2(a2row[j]) * st.v3[j] * dbrow[j];
            v3bar_sum[j] += d1v * dbrow[j];
        }
    }

    // v3 = W3^T wl feeds both W3 and the local head weight.
    for (std::size_t k = 0; k < q; ++k) {
        const double* w3row = params.w3.row(k);
        double acc = 0.0;
        double* w3grow = out.grad.w3.row(k);
        for (std::size_t j = 0; j < q; ++j) {
            acc += w3row[j] * v3bar_sum[j];
            w3grow[j] += params.wl[k] * v3bar_sum[j];
        }
        out.grad.wl[k] += acc;
    }

    {
        Matrix w2g = matmul_tn(a2bar, tape.h1);
        for (std::size_t i = 0; i < w2g.data.size(); ++i) out.grad.w2.data[i] += w2g.data[i];
        auto b2g = column_sums(a2bar);
        for (std::size_t j = 0; j < q; ++j) out.grad.b2[j] += b2g[j];
    }
    Matrix h1bar = matmul(a2bar, params.w2);
    for (std::size_t i = 0; i < n; ++i) {
        const double* a1row = tape.a1.row(i);
        const double* hbrow = h1bar.row(i);
        double* abrow = a1bar.row(i);
        for (std::size_t j = 0; j < q; ++j) abrow[j] += gelu_d1(a1row[j]) * hbrow[j];
    }
    {
        Matrix w1g = matmul_tn(a1bar, tape.z);
        for (std::size_t i = 0; i < w1g.data.size(); ++i) out.grad.w1.data[i] += w1g.data[i];
        auto b1g = column_sums(a1bar);
        for (std::size_t j = 0; j < q; ++j) out.grad.b1[j] += b1g[j];
    }
    return out;
}

// Loss-only evaluations (finite-difference checks and epoch logging).
inline double global_loss_value(const FuseParams& params, const Matrix& z_first,
                                const Matrix& z_second, const std::vector<double>& targets) {
    auto g1 = global_logit(params, z_first);
    auto g2 = global_logit(params, z_second);
    double loss = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double delta = g1[i] - g2[i];
        loss += targets[i] * softplus(-delta) + (1.0 - targets[i]) * softplus(delta);
    }
    return loss / static_cast<double>(targets.size());
}

inline double local_loss_value(const FuseParams& params, const Matrix& z_noisy,
                               const Matrix& eps, double eta) {
    if (!(eta > 0.0)) throw parameter_error("local_loss_value: eta must be positive");
    Matrix s = input_score(params, z_noisy);
    const double inv_eta2 = 1.0 / (eta * eta);
    double loss = 0.0;
    for (std::size_t i = 0; i < s.data.size(); ++i) {
        const double r = s.data[i] + inv_eta2 * eps.data[i];
        loss += 0.5 * r * r;
    }
    return loss / static_cast<double>(s.rows);
}

}  // namespace fuse

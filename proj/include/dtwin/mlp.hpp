#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dtwin/errors.hpp"
#include "dtwin/random.hpp"
#include "dtwin/types.hpp"

namespace dtwin {

inline const std::vector<int> kDefaultLayers = {6, 64, 128, 64, 5};
inline const std::vector<double> kDefaultDropout = {0.2, 0.2, 0.0};

/// Fully connected ReLU network with a linear output layer. Samples are rows:
/// layer l maps a (batch x sizes[l]) block to (batch x sizes[l+1]) via H W^T + b^T.
template <typename Scalar = double>
struct Mlp {
    std::vector<int> sizes;
    std::vector<MatX<Scalar>> W;  // W[l] is sizes[l+1] x sizes[l]
    std::vector<VecX<Scalar>> b;
    std::vector<double> dropout;  // one rate per hidden layer

    std::size_t layers() const { return W.size(); }
    int inputs() const { return sizes.front(); }
    int outputs() const { return sizes.back(); }

    Eigen::Index parameter_count() const {
        Eigen::Index n = 0;
        for (std::size_t l = 0; l < W.size(); ++l) n += W[l].size() + b[l].size();
        return n;
    }

    void validate() const {
        detail::require(sizes.size() >= 2, "Mlp: need at least an input and an output layer");
        for (int s : sizes) detail::require(s >= 1, "Mlp: layer sizes must be >= 1");
        detail::require(W.size() == sizes.size() - 1 && b.size() == W.size(), "Mlp: layer count mismatch");
        detail::require(dropout.size() == sizes.size() - 2, "Mlp: need one dropout rate per hidden layer");
        for (double r : dropout) detail::require(r >= 0.0 && r < 1.0, "Mlp: dropout rate must lie in [0, 1)");
        for (std::size_t l = 0; l < W.size(); ++l) {
            detail::require(W[l].rows() == sizes[l + 1] && W[l].cols() == sizes[l], "Mlp: weight shapes do not chain");
            detail::require(b[l].size() == sizes[l + 1], "Mlp: bias size mismatch");
        }
    }

    /// Weights then bias of each layer, weights row-major.
    VecX<Scalar> flatten() const {
        VecX<Scalar> out(parameter_count());
        Eigen::Index k = 0;
        for (std::size_t l = 0; l < W.size(); ++l) {
            for (Eigen::Index r = 0; r < W[l].rows(); ++r)
                for (Eigen::Index c = 0; c < W[l].cols(); ++c) out[k++] = W[l](r, c);
            out.segment(k, b[l].size()) = b[l];
            k += b[l].size();
        }
        return out;
    }

    void unflatten(const VecX<Scalar>& p) {
        detail::require(p.size() == parameter_count(), "Mlp: flat parameter vector has the wrong length");
        Eigen::Index k = 0;
        for (std::size_t l = 0; l < W.size(); ++l) {
            for (Eigen::Index r = 0; r < W[l].rows(); ++r)
                for (Eigen::Index c = 0; c < W[l].cols(); ++c) W[l](r, c) = p[k++];
            b[l] = p.segment(k, b[l].size());
            k += b[l].size();
        }
    }

    template <typename Other>
    Mlp<Other> cast() const {
        Mlp<Other> m;
        m.sizes = sizes;
        m.dropout = dropout;
        for (std::size_t l = 0; l < W.size(); ++l) {
            m.W.push_back(W[l].template cast<Other>());
            m.b.push_back(b[l].template cast<Other>());
        }
        return m;
    }

    friend bool operator==(const Mlp& a, const Mlp& c) {
        if (a.sizes != c.sizes || a.dropout != c.dropout) return false;
        for (std::size_t l = 0; l < a.W.size(); ++l)
            if (a.W[l] != c.W[l] || a.b[l] != c.b[l]) return false;
        return true;
    }
};

/// All-zero network of the given shape.
template <typename Scalar = double>
Mlp<Scalar> zero_mlp(const std::vector<int>& sizes, std::vector<double> dropout = {}) {
    Mlp<Scalar> m;
    m.sizes = sizes;
    m.dropout = dropout.empty() && sizes.size() >= 2 ? std::vector<double>(sizes.size() - 2, 0.0) : dropout;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        detail::require(sizes[l] >= 1 && sizes[l + 1] >= 1, "Mlp: layer sizes must be >= 1");
        m.W.push_back(MatX<Scalar>::Zero(sizes[l + 1], sizes[l]));
        m.b.push_back(VecX<Scalar>::Zero(sizes[l + 1]));
    }
    m.validate();
    return m;
}

/// Fan-in uniform weights, U(-1 / sqrt(fan_in), +1 / sqrt(fan_in)), zero biases.
template <typename Scalar = double>
Mlp<Scalar> init_mlp(const std::vector<int>& sizes, std::uint64_t seed, std::vector<double> dropout = {}) {
    Mlp<Scalar> m = zero_mlp<Scalar>(sizes, std::move(dropout));
    Rng rng(seed);
    for (auto& w : m.W) {
        const double a = 1.0 / std::sqrt(static_cast<double>(w.cols()));
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = Scalar(uniform(rng, -a, a));
    }
    return m;
}

namespace detail {

// Inverted-dropout mask for one hidden activation block: kept units scaled by 1/(1-rate).
template <typename Scalar>
MatX<Scalar> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
    MatX<Scalar> mask(rows, cols);
    const Scalar keep = Scalar(1.0 / (1.0 - rate));
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) mask(r, c) = uniform01(rng) < rate ? Scalar(0) : keep;
    return mask;
}

template <typename Scalar>
void require_finite_input(const MatX<Scalar>& X, int inputs) {
    require(X.cols() == inputs, "Mlp: input width does not match the first layer");
    require(X.allFinite(), "Mlp: non-finite input");
}

}  // namespace detail

/// Batch forward pass. With `training` set, inverted dropout is applied to the
/// hidden layers using `rng`; otherwise the plain affine-ReLU chain is evaluated.
template <typename Scalar>
MatX<Scalar> forward(const Mlp<Scalar>& m, const MatX<Scalar>& X, bool training = false, Rng* rng = nullptr) {
    detail::require_finite_input(X, m.inputs());
    detail::require(!training || rng != nullptr, "forward: training mode needs a dropout rng");
    MatX<Scalar> H = X;
    for (std::size_t l = 0; l < m.layers(); ++l) {
        MatX<Scalar> Z = H * m.W[l].transpose();
        Z.rowwise() += m.b[l].transpose();
        if (l + 1 == m.layers()) return Z;
        H = Z.cwiseMax(Scalar(0));
        if (training && m.dropout[l] > 0.0) H = H.cwiseProduct(detail::dropout_mask<Scalar>(H.rows(), H.cols(), m.dropout[l], *rng));
    }
    return H;
}

template <typename Scalar>
VecX<Scalar> forward(const Mlp<Scalar>& m, const VecX<Scalar>& x, bool training = false, Rng* rng = nullptr) {
    return forward(m, MatX<Scalar>(x.transpose()), training, rng).row(0).transpose();
}

template <typename Scalar = double>
struct MlpGradient {
    std::vector<MatX<Scalar>> W;
    std::vector<VecX<Scalar>> b;
};

/// Mean squared error over every entry of the (batch x outputs) block, and its
/// gradient by backpropagation. Dropout masks are drawn once and shared by the
/// forward and backward sweeps.
template <typename Scalar>
Scalar mse_and_gradient(const Mlp<Scalar>& m, const MatX<Scalar>& X, const MatX<Scalar>& Y, MlpGradient<Scalar>& grad,
                        bool training = false, Rng* rng = nullptr) {
    detail::require_finite_input(X, m.inputs());
    detail::require(Y.rows() == X.rows() && Y.cols() == m.outputs(), "mse_and_gradient: target shape mismatch");
    detail::require(!training || rng != nullptr, "mse_and_gradient: training mode needs a dropout rng");
    const std::size_t L = m.layers();
    std::vector<MatX<Scalar>> act(L + 1);   // act[0] = X, act[l] = post-activation input of layer l
    std::vector<MatX<Scalar>> mask(L);     // ReLU derivative times dropout scale, hidden layers only
    act[0] = X;
    for (std::size_t l = 0; l < L; ++l) {
        MatX<Scalar> Z = act[l] * m.W[l].transpose();
        Z.rowwise() += m.b[l].transpose();
        if (l + 1 == L) {
            act[l + 1] = std::move(Z);
            break;
        }
        mask[l] = (Z.array() > Scalar(0)).template cast<Scalar>();
        if (training && m.dropout[l] > 0.0)
            mask[l] = mask[l].cwiseProduct(detail::dropout_mask<Scalar>(Z.rows(), Z.cols(), m.dropout[l], *rng));
        act[l + 1] = Z.cwiseProduct(mask[l]);
    }

    const MatX<Scalar> E = act[L] - Y;
    const Scalar count = Scalar(E.size());
    const Scalar loss = E.squaredNorm() / count;

    grad.W.resize(L);
    grad.b.resize(L);
    MatX<Scalar> delta = (Scalar(2) / count) * E;
    for (std::size_t l = L; l-- > 0;) {
        grad.W[l] = delta.transpose() * act[l];
        grad.b[l] = delta.colwise().sum().transpose();
        if (l > 0) delta = (delta * m.W[l]).cwiseProduct(mask[l - 1]);
    }
    return loss;
}

template <typename Scalar>
Scalar mse(const Mlp<Scalar>& m, const MatX<Scalar>& X, const MatX<Scalar>& Y) {
    detail::require(Y.rows() == X.rows() && Y.cols() == m.outputs(), "mse: target shape mismatch");
    return (forward(m, X) - Y).squaredNorm() / Scalar(Y.size());
}

}  // namespace dtwin

#ifndef PESVLAB_TRANSFORMS_HPP
#define PESVLAB_TRANSFORMS_HPP

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "activation.hpp"
#include "errors.hpp"
#include "matrix.hpp"
#include "network.hpp"

namespace pesvlab {

/// A fully connected network in the usual weights-plus-biases form over raw inputs x in R^d.
///
/// weights[0] is m_1 x d, weights[l] is m_{l+1} x m_l, weights.back() is 1 x m_{L-1};
/// biases[l] has one entry per row of weights[l] (the last one is the output bias).
struct StandardNetwork {
    std::size_t input_dim{0};
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    void validate() const
    {
        if (weights.size() < 2 || biases.size() != weights.size()) {
            throw ShapeError("standard network needs >= 2 layers and one bias vector per layer");
        }
        if (weights.front().cols() != input_dim) {
            throw ShapeError("first layer columns must equal the input dimension");
        }
        for (std::size_t l = 0; l < weights.size(); ++l) {
            if (biases[l].size() != weights[l].rows()) {
                throw ShapeError("bias length mismatch in layer " + std::to_string(l + 1));
            }
            if (l > 0 && weights[l].cols() != weights[l - 1].rows()) {
                throw ShapeError("layer shapes do not chain");
            }
        }
        if (weights.back().rows() != 1) {
            throw ShapeError("output layer must have a single row");
        }
    }

    [[nodiscard]] double operator()(const Activation& act, std::span<const double> x) const
    {
        std::vector<double> h(x.begin(), x.end()), next;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            next.resize(weights[l].rows());
            for (std::size_t r = 0; r < weights[l].rows(); ++r) {
                next[r] = dot(weights[l].row(r), h) + biases[l][r];
                if (l + 1 < weights.size()) {
                    next[r] = act(next[r]);
                }
            }
            h.swap(next);
        }
        return h[0];
    }
};

namespace detail {

/// Weights t_l and carried constants kappa_l of a pass-through unit chain.
///
/// Unit l receives t_l times the previous constant (kappa_0 = 1, the bias coordinate) and
/// outputs kappa_l = act(t_l * kappa_{l-1}) != 0, so later layers can read any constant from it.
struct ConstantChain {
    std::vector<double> gains;
    std::vector<double> constants;
};

inline ConstantChain constant_chain(const Activation& act, std::size_t hidden_layers)
{
    static constexpr std::array<double, 8> candidates{1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 4.0, -4.0};
    ConstantChain chain;
    double kappa = 1.0;
    for (std::size_t l = 0; l < hidden_layers; ++l) {
        bool found = false;
        for (double t : candidates) {
            double next = act(0.0 + t * kappa);
            if (next != 0.0 && std::isfinite(next)) {
                chain.gains.push_back(t);
                chain.constants.push_back(next);
                kappa = next;
                found = true;
                break;
            }
        }
        if (!found) {
            throw UnsupportedError("activation cannot carry a nonzero constant through a pass-through unit");
        }
    }
    return chain;
}

} // namespace detail

/// Folds every bias into the weights. Each hidden layer gains one pass-through unit that
/// carries a constant; with relu that constant is exactly 1. Outputs agree with the original on all x.
[[nodiscard]] inline NetParams absorb_bias(const StandardNetwork& net, const Activation& act)
{
    net.validate();
    const std::size_t hidden = net.weights.size() - 1;
    const auto chain = detail::constant_chain(act, hidden);
    std::vector<Matrix> layers;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const Matrix& w = net.weights[l];
        const bool is_output = l == hidden;
        const std::size_t rows = w.rows() + (is_output ? 0 : 1);
        const std::size_t cols = w.cols() + 1;
        const double carried = l == 0 ? 1.0 : chain.constants[l - 1];
        Matrix m(rows, cols);
        for (std::size_t r = 0; r < w.rows(); ++r) {
            for (std::size_t c = 0; c < w.cols(); ++c) {
                m(r, c) = w(r, c);
            }
            m(r, w.cols()) = net.biases[l][r] / carried;
        }
        if (!is_output) {
            m(w.rows(), w.cols()) = chain.gains[l];
        }
        layers.push_back(std::move(m));
    }
    return NetParams(net.input_dim, std::move(layers));
}

/// Rewrites a network with sigma(0) != 0 onto sigma* = sigma - sigma(0).
///
/// Every hidden layer gains one pass-through unit carrying a constant; the next layer reads the
/// sigma(0) offset of the replaced units from it. Returns the new weights and sigma*. The input
/// stays x~ = (x, 1) since its bias coordinate already supplies the constant.
[[nodiscard]] inline std::pair<NetParams, Activation> normalize_activation(const NetParams& params,
                                                                           const Activation& act)
{
    const double offset = act.at_zero();
    if (offset == 0.0) {
        return {params, act};
    }
    const Activation centered = act.shifted(-offset);
    const std::size_t hidden = params.layer_count() - 1;
    const auto chain = detail::constant_chain(centered, hidden);
    std::vector<Matrix> layers;
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
        const Matrix& w = params.layer(l);
        const bool is_output = l == hidden;
        if (l == 0) {
            Matrix m(w.rows() + 1, w.cols());
            for (std::size_t r = 0; r < w.rows(); ++r) {
                for (std::size_t c = 0; c < w.cols(); ++c) {
                    m(r, c) = w(r, c);
                }
            }
            m(w.rows(), w.cols() - 1) = chain.gains[0];
            layers.push_back(std::move(m));
            continue;
        }
        const double carried = chain.constants[l - 1];
        Matrix m(w.rows() + (is_output ? 0 : 1), w.cols() + 1);
        for (std::size_t r = 0; r < w.rows(); ++r) {
            double row_sum = 0.0;
            for (std::size_t c = 0; c < w.cols(); ++c) {
                m(r, c) = w(r, c);
                row_sum += w(r, c);
            }
            m(r, w.cols()) = offset * row_sum / carried;
        }
        if (!is_output) {
            m(w.rows(), w.cols()) = chain.gains[l];
        }
        layers.push_back(std::move(m));
    }
    return {NetParams(params.input_dim(), std::move(layers)), centered};
}

} // namespace pesvlab

#endif // PESVLAB_TRANSFORMS_HPP

#ifndef PESVLAB_NETWORK_HPP
#define PESVLAB_NETWORK_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "activation.hpp"
#include "errors.hpp"
#include "matrix.hpp"
#include "width_vector.hpp"

namespace pesvlab {

/// Weights of a bias-free fully connected network of depth L over inputs x~ = (x, 1).
///
/// layer(0) is the first layer w^1 (m_1 x (d+1)), layer(l-1) is w^l (m_l x m_{l-1}) and
/// layer(L-1) is the output row a^L (1 x m_{L-1}). The same type carries gradients.
class NetParams {
public:
    NetParams() = default;

    NetParams(std::size_t input_dim, std::vector<Matrix> layers) : input_dim_(input_dim), layers_(std::move(layers))
    {
        if (input_dim_ == 0) {
            throw ShapeError("input dimension must be positive");
        }
        if (layers_.size() < 2) {
            throw ShapeError("a network needs at least one hidden layer and an output layer");
        }
        if (layers_.front().cols() != input_dim_ + 1) {
            throw ShapeError("first layer has " + std::to_string(layers_.front().cols()) + " columns, expected d+1 = " +
                             std::to_string(input_dim_ + 1));
        }
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            if (layers_[l].rows() == 0) {
                throw ShapeError("layer " + std::to_string(l + 1) + " has no rows");
            }
            if (l > 0 && layers_[l].cols() != layers_[l - 1].rows()) {
                throw ShapeError("layer " + std::to_string(l + 1) + " has " + std::to_string(layers_[l].cols()) +
                                 " columns but layer " + std::to_string(l) + " has " +
                                 std::to_string(layers_[l - 1].rows()) + " rows");
            }
            if (!layers_[l].all_finite()) {
                throw DomainError("layer " + std::to_string(l + 1) + " has non-finite entries");
            }
        }
        if (layers_.back().rows() != 1) {
            throw ShapeError("output layer must have a single row");
        }
    }

    /// All-zero parameters of the given architecture.
    static NetParams zeros(std::size_t input_dim, const WidthVector& widths)
    {
        std::vector<Matrix> layers;
        std::size_t prev = input_dim + 1;
        for (std::size_t w : widths.widths()) {
            layers.emplace_back(w, prev);
            prev = w;
        }
        layers.emplace_back(1, prev);
        return NetParams(input_dim, std::move(layers));
    }

    [[nodiscard]] std::size_t depth() const noexcept { return layers_.size(); }
    [[nodiscard]] std::size_t input_dim() const noexcept { return input_dim_; }
    [[nodiscard]] std::size_t layer_count() const noexcept { return layers_.size(); }

    [[nodiscard]] WidthVector widths() const
    {
        std::vector<std::size_t> w;
        for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
            w.push_back(layers_[l].rows());
        }
        return WidthVector(std::move(w));
    }

    [[nodiscard]] const Matrix& layer(std::size_t l) const { return layers_.at(l); }
    [[nodiscard]] Matrix& layer(std::size_t l) { return layers_.at(l); }
    [[nodiscard]] const std::vector<Matrix>& layers() const noexcept { return layers_; }

    [[nodiscard]] const Matrix& output() const { return layers_.back(); }
    [[nodiscard]] Matrix& output() { return layers_.back(); }

    [[nodiscard]] std::size_t parameter_count() const noexcept
    {
        std::size_t n = 0;
        for (const auto& m : layers_) {
            n += m.size();
        }
        return n;
    }

    [[nodiscard]] bool same_shape(const NetParams& other) const noexcept
    {
        if (input_dim_ != other.input_dim_ || layers_.size() != other.layers_.size()) {
            return false;
        }
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            if (layers_[l].rows() != other.layers_[l].rows() || layers_[l].cols() != other.layers_[l].cols()) {
                return false;
            }
        }
        return true;
    }

    /// this += alpha * other
    NetParams& axpy(double alpha, const NetParams& other)
    {
        if (!same_shape(other)) {
            throw ShapeError("axpy on networks of different shapes");
        }
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            auto dst = layers_[l].data();
            auto src = other.layers_[l].data();
            for (std::size_t i = 0; i < dst.size(); ++i) {
                dst[i] += alpha * src[i];
            }
        }
        return *this;
    }

    NetParams& scale(double alpha)
    {
        for (auto& m : layers_) {
            for (double& v : m.data()) {
                v *= alpha;
            }
        }
        return *this;
    }

    [[nodiscard]] bool all_finite() const noexcept
    {
        for (const auto& m : layers_) {
            if (!m.all_finite()) {
                return false;
            }
        }
        return true;
    }

    /// Euclidean norm of all entries taken together.
    [[nodiscard]] double frobenius_norm() const noexcept
    {
        double s = 0.0;
        for (const auto& m : layers_) {
            s += dot(m.data(), m.data());
        }
        return std::sqrt(s);
    }

    friend bool operator==(const NetParams&, const NetParams&) = default;

private:
    std::size_t input_dim_{0};
    std::vector<Matrix> layers_;
};

/// Appends the bias coordinate: rows x -> (x, 1).
[[nodiscard]] inline Matrix with_bias_column(const Matrix& raw)
{
    Matrix out(raw.rows(), raw.cols() + 1);
    for (std::size_t i = 0; i < raw.rows(); ++i) {
        for (std::size_t j = 0; j < raw.cols(); ++j) {
            out(i, j) = raw(i, j);
        }
        out(i, raw.cols()) = 1.0;
    }
    return out;
}

namespace detail {

/// Pre-activations z^l (n x m_l) for every layer plus the post-activations feeding each layer.
struct ForwardTrace {
    std::vector<Matrix> pre;   // pre[l]: input to activation after layer l (last one is the output)
    std::vector<Matrix> post;  // post[l]: input to layer l (post[0] = x~)
};

inline void check_batch(const NetParams& params, const Matrix& inputs)
{
    if (inputs.cols() != params.input_dim() + 1) {
        throw ShapeError("inputs have " + std::to_string(inputs.cols()) + " columns, network expects d+1 = " +
                         std::to_string(params.input_dim() + 1));
    }
}

// out = in * W^T
inline Matrix apply_layer(const Matrix& in, const Matrix& w)
{
    Matrix out(in.rows(), w.rows());
    for (std::size_t i = 0; i < in.rows(); ++i) {
        auto x = in.row(i);
        for (std::size_t r = 0; r < w.rows(); ++r) {
            out(i, r) = dot(w.row(r), x);
        }
    }
    return out;
}

inline ForwardTrace forward_trace(const NetParams& params, const Activation& act, const Matrix& inputs)
{
    check_batch(params, inputs);
    ForwardTrace t;
    t.post.push_back(inputs);
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
        t.pre.push_back(apply_layer(t.post.back(), params.layer(l)));
        if (l + 1 < params.layer_count()) {
            Matrix h = t.pre.back();
            for (double& v : h.data()) {
                v = act(v);
            }
            t.post.push_back(std::move(h));
        }
    }
    return t;
}

} // namespace detail

/// f(x~; theta) for every row of the batch: activation after each hidden layer, none after the output.
[[nodiscard]] inline std::vector<double> forward(const NetParams& params, const Activation& act, const Matrix& inputs)
{
    detail::check_batch(params, inputs);
    std::vector<double> out(inputs.rows());
    std::vector<double> h, next;
    for (std::size_t i = 0; i < inputs.rows(); ++i) {
        auto x = inputs.row(i);
        h.assign(x.begin(), x.end());
        for (std::size_t l = 0; l < params.layer_count(); ++l) {
            const Matrix& w = params.layer(l);
            next.resize(w.rows());
            for (std::size_t r = 0; r < w.rows(); ++r) {
                next[r] = dot(w.row(r), h);
            }
            if (l + 1 < params.layer_count()) {
                for (double& v : next) {
                    v = act(v);
                }
            }
            h.swap(next);
        }
        out[i] = h[0];
    }
    return out;
}

/// Single-input convenience overload.
[[nodiscard]] inline double forward_one(const NetParams& params, const Activation& act, std::span<const double> x)
{
    Matrix in(1, x.size(), std::vector<double>(x.begin(), x.end()));
    return forward(params, act, in)[0];
}

/// Gradient of sum_i upstream_i * f(x_i; theta) given a forward trace of the same batch.
[[nodiscard]] inline NetParams backprop(const NetParams& params, const Activation& act,
                                        const detail::ForwardTrace& trace, std::span<const double> upstream)
{
    const std::size_t n = trace.post.front().rows();
    if (upstream.size() != n) {
        throw ShapeError("upstream has " + std::to_string(upstream.size()) + " entries for " + std::to_string(n) +
                         " inputs");
    }
    if (!act.differentiable()) {
        throw UnsupportedError("activation " + act.name() + " has no derivative");
    }
    NetParams grad = params;
    grad.scale(0.0);

    const std::size_t last = params.layer_count() - 1;
    // delta: d(objective)/d(pre-activation of the current layer), n x rows
    Matrix delta(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        delta(i, 0) = upstream[i];
    }
    for (std::size_t l = last + 1; l-- > 0;) {
        const Matrix& in = trace.post[l];
        Matrix& g = grad.layer(l);
        for (std::size_t i = 0; i < n; ++i) {
            auto x = in.row(i);
            for (std::size_t r = 0; r < g.rows(); ++r) {
                const double dr = delta(i, r);
                if (dr == 0.0) {
                    continue;
                }
                auto gr = g.row(r);
                for (std::size_t c = 0; c < gr.size(); ++c) {
                    gr[c] += dr * x[c];
                }
            }
        }
        if (l == 0) {
            break;
        }
        const Matrix& w = params.layer(l);
        const Matrix& z = trace.pre[l - 1];
        Matrix prev(n, w.cols());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t r = 0; r < w.rows(); ++r) {
                const double dr = delta(i, r);
                if (dr == 0.0) {
                    continue;
                }
                auto wr = w.row(r);
                for (std::size_t c = 0; c < w.cols(); ++c) {
                    prev(i, c) += dr * wr[c];
                }
            }
            for (std::size_t c = 0; c < w.cols(); ++c) {
                prev(i, c) *= act.derivative(z(i, c));
            }
        }
        delta = std::move(prev);
    }
    return grad;
}

/// Gradient of sum_i upstream_i * f(x_i; theta) with respect to every weight.
[[nodiscard]] inline NetParams backprop(const NetParams& params, const Activation& act, const Matrix& inputs,
                                        std::span<const double> upstream)
{
    if (upstream.size() != inputs.rows()) {
        throw ShapeError("upstream has " + std::to_string(upstream.size()) + " entries for " +
                         std::to_string(inputs.rows()) + " inputs");
    }
    if (!act.differentiable()) {
        throw UnsupportedError("activation " + act.name() + " has no derivative");
    }
    return backprop(params, act, detail::forward_trace(params, act, inputs), upstream);
}

} // namespace pesvlab

#endif // PESVLAB_NETWORK_HPP

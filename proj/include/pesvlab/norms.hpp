#ifndef PESVLAB_NORMS_HPP
#define PESVLAB_NORMS_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "activation.hpp"
#include "errors.hpp"
#include "matrix.hpp"
#include "network.hpp"

namespace pesvlab {

namespace detail {

inline double sign(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline std::vector<double> first_layer_row_norms(const NetParams& p)
{
    const Matrix& w = p.layer(0);
    std::vector<double> v(w.rows());
    for (std::size_t k = 0; k < w.rows(); ++k) {
        v[k] = norm2(w.row(k));
    }
    return v;
}

// Forward mass vectors v_l = |w^l| v_{l-1}, v_1 = row norms of w^1. Entry l-1 holds v_l.
inline std::vector<std::vector<double>> forward_mass(const NetParams& p)
{
    std::vector<std::vector<double>> v{first_layer_row_norms(p)};
    for (std::size_t l = 1; l + 1 < p.layer_count(); ++l) {
        const Matrix& w = p.layer(l);
        std::vector<double> next(w.rows(), 0.0);
        for (std::size_t r = 0; r < w.rows(); ++r) {
            auto row = w.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) {
                next[r] += std::abs(row[c]) * v.back()[c];
            }
        }
        v.push_back(std::move(next));
    }
    return v;
}

} // namespace detail

/// Path-enhanced scaled variation norm: sum over hidden paths of
/// |a_{i_{L-1}} w^{L-1} ... w^2_{i_2 i_1}| * ||w^1_{i_1}||_2, evaluated as |a| |w^{L-1}| ... |w^2| v.
[[nodiscard]] inline double pesv_norm(const NetParams& params)
{
    const auto mass = detail::forward_mass(params);
    const Matrix& a = params.output();
    double total = 0.0;
    for (std::size_t k = 0; k < a.cols(); ++k) {
        total += std::abs(a(0, k)) * mass.back()[k];
    }
    return total;
}

/// sum_k |W_k| ||w^1_k||_2 with W = a^L w^{L-1} ... w^2 the signed product. Never exceeds pesv_norm.
[[nodiscard]] inline double pesv_matrixproduct_variant(const NetParams& params)
{
    std::vector<double> row(params.output().data().begin(), params.output().data().end());
    for (std::size_t l = params.layer_count() - 1; l-- > 1;) {
        const Matrix& w = params.layer(l);
        std::vector<double> next(w.cols(), 0.0);
        for (std::size_t r = 0; r < w.rows(); ++r) {
            for (std::size_t c = 0; c < w.cols(); ++c) {
                next[c] += row[r] * w(r, c);
            }
        }
        row = std::move(next);
    }
    const auto norms = detail::first_layer_row_norms(params);
    double total = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
        total += std::abs(row[k]) * norms[k];
    }
    return total;
}

/// A subgradient of pesv_norm; components at zero weights and at zero first-layer rows are 0.
[[nodiscard]] inline NetParams pesv_subgradient(const NetParams& params)
{
    const auto mass = detail::forward_mass(params);
    const std::size_t last = params.layer_count() - 1;
    NetParams g = params;
    g.scale(0.0);

    // back[l] = d nu / d v_l, propagated from the output row.
    std::vector<double> back(params.output().cols());
    for (std::size_t k = 0; k < back.size(); ++k) {
        const double a = params.output()(0, k);
        g.output()(0, k) = detail::sign(a) * mass.back()[k];
        back[k] = std::abs(a);
    }
    for (std::size_t l = last; l-- > 1;) {
        const Matrix& w = params.layer(l);
        Matrix& gw = g.layer(l);
        const auto& below = mass[l - 1];
        std::vector<double> next(w.cols(), 0.0);
        for (std::size_t r = 0; r < w.rows(); ++r) {
            for (std::size_t c = 0; c < w.cols(); ++c) {
                gw(r, c) = back[r] * detail::sign(w(r, c)) * below[c];
                next[c] += back[r] * std::abs(w(r, c));
            }
        }
        back = std::move(next);
    }
    const Matrix& w1 = params.layer(0);
    Matrix& g1 = g.layer(0);
    for (std::size_t k = 0; k < w1.rows(); ++k) {
        const double n = mass[0][k];
        if (n == 0.0) {
            continue;
        }
        for (std::size_t c = 0; c < w1.cols(); ++c) {
            g1(k, c) = back[k] * w1(k, c) / n;
        }
    }
    return g;
}

/// ||theta||_2^2, the sum of squares of every weight.
[[nodiscard]] inline double weight_decay_norm(const NetParams& params)
{
    double s = 0.0;
    for (const auto& m : params.layers()) {
        s += dot(m.data(), m.data());
    }
    return s;
}

namespace detail {

inline double lp_norm(std::span<const double> v, double p)
{
    if (p == 1.0) {
        double s = 0.0;
        for (double x : v) {
            s += std::abs(x);
        }
        return s;
    }
    if (p == 2.0) {
        return norm2(v);
    }
    double s = 0.0;
    for (double x : v) {
        s += std::pow(std::abs(x), p);
    }
    return std::pow(s, 1.0 / p);
}

inline void check_exponents(double p, double q)
{
    if (!(p >= 1.0 && std::isfinite(p) && q >= 1.0 && std::isfinite(q))) {
        throw DomainError("mixed max norm exponents must lie in [1, inf)");
    }
}

} // namespace detail

/// Mixed l_{p,q} max norm: the largest per-unit l_p norm of incoming weights over layers >= 2
/// (output row included), joined by max with the largest per-row l_q norm of the first layer.
[[nodiscard]] inline double mixed_max_norm(const NetParams& params, double p, double q)
{
    detail::check_exponents(p, q);
    double best = 0.0;
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
        const Matrix& w = params.layer(l);
        const double e = l == 0 ? q : p;
        for (std::size_t r = 0; r < w.rows(); ++r) {
            best = std::max(best, detail::lp_norm(w.row(r), e));
        }
    }
    return best;
}

/// A subgradient of mixed_max_norm: the gradient of the first maximizing row's norm.
[[nodiscard]] inline NetParams mixed_max_subgradient(const NetParams& params, double p, double q)
{
    detail::check_exponents(p, q);
    NetParams g = params;
    g.scale(0.0);
    double best = 0.0;
    std::size_t best_l = 0, best_r = 0;
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
        const Matrix& w = params.layer(l);
        const double e = l == 0 ? q : p;
        for (std::size_t r = 0; r < w.rows(); ++r) {
            const double v = detail::lp_norm(w.row(r), e);
            if (v > best) {
                best = v;
                best_l = l;
                best_r = r;
            }
        }
    }
    if (best == 0.0) {
        return g;
    }
    const double e = best_l == 0 ? q : p;
    auto src = params.layer(best_l).row(best_r);
    auto dst = g.layer(best_l).row(best_r);
    for (std::size_t c = 0; c < src.size(); ++c) {
        const double x = src[c];
        dst[c] = e == 1.0 ? detail::sign(x) : detail::sign(x) * std::pow(std::abs(x) / best, e - 1.0);
    }
    return g;
}

/// Multiplies the incoming weights of hidden neuron (layer, index) by c and divides its
/// outgoing weights by c. Layers are numbered 1..L-1 as hidden layers.
[[nodiscard]] inline NetParams rescale_neuron(const NetParams& params, std::size_t layer, std::size_t index, double c)
{
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw DomainError("rescaling factor must be positive and finite");
    }
    if (layer < 1 || layer >= params.layer_count()) {
        throw DomainError("hidden layer index out of range");
    }
    NetParams out = params;
    Matrix& in = out.layer(layer - 1);
    Matrix& next = out.layer(layer);
    if (index >= in.rows()) {
        throw DomainError("neuron index out of range");
    }
    for (double& v : in.row(index)) {
        v *= c;
    }
    for (std::size_t r = 0; r < next.rows(); ++r) {
        next(r, index) /= c;
    }
    return out;
}

struct BalanceOptions {
    double relative_tolerance{1e-10};
    std::size_t max_sweeps{10000};
};

/// Output-preserving per-neuron rescaling that drives the weight decay to a stationary point.
///
/// Each neuron takes c = sqrt(||outgoing|| / ||incoming||), the minimizer of
/// c^2 ||incoming||^2 + c^-2 ||outgoing||^2. A neuron with one side zero has the other side
/// zeroed, the limit of such rescalings. Sweeps stop once the relative decrease of the
/// weight decay falls below the tolerance. Needs a positively homogeneous activation.
[[nodiscard]] inline NetParams balance_relu(const NetParams& params, const Activation& act,
                                            BalanceOptions options = {})
{
    if (!act.positively_homogeneous()) {
        throw UnsupportedError("balancing needs a positively homogeneous activation, got " + act.name());
    }
    NetParams out = params;
    double prev = weight_decay_norm(out);
    for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
        for (std::size_t l = 1; l < out.layer_count(); ++l) {
            Matrix& in = out.layer(l - 1);
            Matrix& next = out.layer(l);
            for (std::size_t j = 0; j < in.rows(); ++j) {
                const double in_sq = dot(in.row(j), in.row(j));
                double out_sq = 0.0;
                for (std::size_t r = 0; r < next.rows(); ++r) {
                    out_sq += next(r, j) * next(r, j);
                }
                if (in_sq == 0.0 || out_sq == 0.0) {
                    // One side carries nothing to the output; the c -> 0 (or inf) limit zeroes the other.
                    for (double& v : in.row(j)) {
                        v = 0.0;
                    }
                    for (std::size_t r = 0; r < next.rows(); ++r) {
                        next(r, j) = 0.0;
                    }
                    continue;
                }
                const double c = std::pow(out_sq / in_sq, 0.25);
                if (c == 1.0) {
                    continue;
                }
                for (double& v : in.row(j)) {
                    v *= c;
                }
                for (std::size_t r = 0; r < next.rows(); ++r) {
                    next(r, j) /= c;
                }
            }
        }
        const double now = weight_decay_norm(out);
        const double decrease = prev - now;
        prev = now;
        if (decrease <= options.relative_tolerance * std::max(now, 1e-300)) {
            break;
        }
    }
    return out;
}

/// Output-preserving rescaling that sets every hidden unit's incoming norm (l_q on the first
/// layer, l_p after) to tau = nu^{1/L}, processing layers front to back. With p = 1, q = 2 every
/// path factor is then tau and the output row has l_1 norm tau, so mixed_max_norm(1, 2) = nu^{1/L}.
[[nodiscard]] inline NetParams canonical_max_norm_rescaling(const NetParams& params, const Activation& act,
                                                            double p = 1.0, double q = 2.0)
{
    if (!act.positively_homogeneous()) {
        throw UnsupportedError("max-norm rescaling needs a positively homogeneous activation, got " + act.name());
    }
    detail::check_exponents(p, q);
    const double nu = pesv_norm(params);
    if (!(nu > 0.0)) {
        throw DomainError("max-norm rescaling needs nu > 0");
    }
    const double tau = std::pow(nu, 1.0 / static_cast<double>(params.depth()));
    NetParams out = params;
    for (std::size_t l = 1; l < out.layer_count(); ++l) {
        Matrix& in = out.layer(l - 1);
        Matrix& next = out.layer(l);
        const double e = l == 1 ? q : p;
        for (std::size_t j = 0; j < in.rows(); ++j) {
            const double norm = detail::lp_norm(in.row(j), e);
            if (norm == 0.0) {
                continue;
            }
            const double c = tau / norm;
            for (double& v : in.row(j)) {
                v *= c;
            }
            for (std::size_t r = 0; r < next.rows(); ++r) {
                next(r, j) /= c;
            }
        }
    }
    return out;
}

} // namespace pesvlab

#endif // PESVLAB_NORMS_HPP

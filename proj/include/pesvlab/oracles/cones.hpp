#ifndef PESVLAB_ORACLES_CONES_HPP
#define PESVLAB_ORACLES_CONES_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "../activation.hpp"
#include "../errors.hpp"
#include "../network.hpp"
#include "../norms.hpp"

namespace pesvlab::oracles {

/// Cone labels for every hidden neuron; labels[l][j] is the label of neuron j in hidden layer l+1.
struct ConeGroups {
    std::vector<std::vector<std::size_t>> labels;
    std::vector<std::size_t> group_count;
};

namespace detail {

inline void require_relu(const Activation& act)
{
    if (act.kind() != ActivationKind::relu) {
        throw UnsupportedError("cone grouping is defined for relu only, got " + act.name());
    }
}

inline int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

} // namespace detail

/// Groups neurons of each hidden layer by their activation pattern over the batch (preactivation
/// > 0) together with the signs of their outgoing weights. Labels count up in order of first
/// appearance.
[[nodiscard]] inline ConeGroups sign_pattern_groups(const NetParams& params, const Activation& act,
                                                    const Matrix& inputs)
{
    detail::require_relu(act);
    const auto trace = pesvlab::detail::forward_trace(params, act, inputs);
    ConeGroups g;
    for (std::size_t l = 0; l + 1 < params.layer_count(); ++l) {
        const Matrix& z = trace.pre[l];
        const Matrix& next = params.layer(l + 1);
        std::map<std::vector<int>, std::size_t> seen;
        std::vector<std::size_t> labels(z.cols());
        for (std::size_t j = 0; j < z.cols(); ++j) {
            std::vector<int> key;
            key.reserve(z.rows() + next.rows());
            for (std::size_t i = 0; i < z.rows(); ++i) {
                key.push_back(z(i, j) > 0.0 ? 1 : 0);
            }
            for (std::size_t r = 0; r < next.rows(); ++r) {
                key.push_back(detail::sign_of(next(r, j)));
            }
            auto [it, inserted] = seen.emplace(std::move(key), seen.size());
            labels[j] = it->second;
        }
        g.group_count.push_back(seen.size());
        g.labels.push_back(std::move(labels));
    }
    return g;
}

struct CollinearityOptions {
    double boundary_tolerance{1e-6};  // |preactivation| at or below this on any input excludes the neuron
    double vanish_fraction{1e-3};     // path mass at or below this fraction of nu excludes the neuron
};

struct CollinearityGroup {
    std::size_t label{0};
    std::vector<std::size_t> members;  // neurons entering the cosine
    std::vector<std::size_t> excluded;
    double min_abs_cosine{1.0};
};

struct CollinearityReport {
    std::vector<CollinearityGroup> groups;
    std::vector<std::size_t> boundary;   // first-layer neurons near a kink
    std::vector<std::size_t> vanishing;  // first-layer neurons carrying no path mass
    double global_min_abs_cosine{1.0};
};

/// Minimum pairwise |cosine| of full first-layer rows (bias column included) inside each cone.
/// Groups with fewer than two retained members report 1.
[[nodiscard]] inline CollinearityReport collinearity_report(const NetParams& params, const Activation& act,
                                                            const Matrix& inputs, CollinearityOptions options = {})
{
    detail::require_relu(act);
    const ConeGroups cones = sign_pattern_groups(params, act, inputs);
    const auto trace = pesvlab::detail::forward_trace(params, act, inputs);
    const Matrix& z = trace.pre.front();
    const Matrix& w1 = params.layer(0);
    const std::size_t m1 = w1.rows();

    // back[k] = (|a| |w^{L-1}| ... |w^2|)_k
    std::vector<double> back(params.output().cols());
    for (std::size_t k = 0; k < back.size(); ++k) {
        back[k] = std::abs(params.output()(0, k));
    }
    for (std::size_t l = params.layer_count() - 1; l-- > 1;) {
        const Matrix& w = params.layer(l);
        std::vector<double> prev(w.cols(), 0.0);
        for (std::size_t r = 0; r < w.rows(); ++r) {
            for (std::size_t c = 0; c < w.cols(); ++c) {
                prev[c] += back[r] * std::abs(w(r, c));
            }
        }
        back = std::move(prev);
    }
    const double nu = pesv_norm(params);

    CollinearityReport rep;
    std::vector<bool> keep(m1, true);
    for (std::size_t k = 0; k < m1; ++k) {
        const double mass = back[k] * norm2(w1.row(k));
        if (mass <= options.vanish_fraction * nu) {
            rep.vanishing.push_back(k);
            keep[k] = false;
            continue;
        }
        for (std::size_t i = 0; i < z.rows(); ++i) {
            if (std::abs(z(i, k)) <= options.boundary_tolerance) {
                rep.boundary.push_back(k);
                keep[k] = false;
                break;
            }
        }
    }

    const auto& labels = cones.labels.front();
    rep.groups.resize(cones.group_count.front());
    for (std::size_t g = 0; g < rep.groups.size(); ++g) {
        rep.groups[g].label = g;
    }
    for (std::size_t k = 0; k < m1; ++k) {
        auto& grp = rep.groups[labels[k]];
        (keep[k] ? grp.members : grp.excluded).push_back(k);
    }
    for (auto& grp : rep.groups) {
        for (std::size_t i = 0; i < grp.members.size(); ++i) {
            for (std::size_t j = i + 1; j < grp.members.size(); ++j) {
                auto u = w1.row(grp.members[i]);
                auto v = w1.row(grp.members[j]);
                const double cosine = dot(u, v) / std::sqrt(dot(u, u) * dot(v, v));
                grp.min_abs_cosine = std::min(grp.min_abs_cosine, std::min(1.0, std::abs(cosine)));
            }
        }
        rep.global_min_abs_cosine = std::min(rep.global_min_abs_cosine, grp.min_abs_cosine);
    }
    return rep;
}

} // namespace pesvlab::oracles

#endif // PESVLAB_ORACLES_CONES_HPP

#ifndef PESVLAB_ORACLES_COVERING_HPP
#define PESVLAB_ORACLES_COVERING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "../activation.hpp"
#include "../errors.hpp"
#include "../network.hpp"
#include "../norms.hpp"
#include "../theory.hpp"

namespace pesvlab::oracles {

struct CoveringResult {
    std::size_t packing{0};  // greedy delta-packing size, a lower bound on N(delta/2)
    double log_packing{0.0};
    double entropy_bound{0.0};  // metric_entropy_bound(delta/2)
    std::size_t grid_points{0};
    double grid_spacing{0.0};
    bool pass{false};
};

/// Points of a regular grid of spacing h inside the unit ball of R^d, with the bias
/// coordinate appended.
[[nodiscard]] inline Matrix ball_grid(std::size_t d, double h)
{
    if (d == 0 || !(h > 0.0)) {
        throw DomainError("grid needs d >= 1 and positive spacing");
    }
    const auto per_axis = static_cast<std::size_t>(std::floor(1.0 / h));
    const std::size_t side = 2 * per_axis + 1;
    std::vector<double> flat;
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> x(d);
    for (;;) {
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            x[j] = (static_cast<double>(idx[j]) - static_cast<double>(per_axis)) * h;
            sq += x[j] * x[j];
        }
        if (sq <= 1.0 + 1e-12) {
            flat.insert(flat.end(), x.begin(), x.end());
            flat.push_back(1.0);
        }
        std::size_t j = 0;
        while (j < d && ++idx[j] == side) {
            idx[j++] = 0;
        }
        if (j == d) {
            break;
        }
    }
    const std::size_t rows = flat.size() / (d + 1);
    return Matrix(rows, d + 1, std::move(flat));
}

/// Greedy sup-norm packing of sampled members of the PeSV ball of radius 1.
///
/// Networks get standard normal weights and are rescaled to nu = u with u ~ U(0, 1). Distances
/// are maxima over a grid of the input ball; the grid maximum never exceeds the true sup
/// distance, so grid-separated functions are also separated on the ball and the count stays a
/// valid packing. Spacing h = delta / (5 L sqrt(d)) with L = L_sigma^{L-1} keeps the grid within
/// delta/10 of the true sup.
[[nodiscard]] inline CoveringResult covering_packing_lower_bound(const WidthVector& widths, double delta,
                                                                 std::size_t input_dim, const Activation& act,
                                                                 std::size_t param_samples, std::uint64_t seed)
{
    if (!(delta > 0.0)) {
        throw DomainError("packing separation must be positive");
    }
    const double lip = std::pow(act.lipschitz(), static_cast<double>(widths.size()));
    CoveringResult r;
    r.grid_spacing = delta / (5.0 * std::max(lip, 1e-12) * std::sqrt(static_cast<double>(input_dim)));
    const Matrix grid = ball_grid(input_dim, std::min(r.grid_spacing, 1.0));
    r.grid_points = grid.rows();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> centers;
    for (std::size_t s = 0; s < param_samples; ++s) {
        NetParams p = NetParams::zeros(input_dim, widths);
        for (std::size_t l = 0; l < p.layer_count(); ++l) {
            for (double& v : p.layer(l).data()) {
                v = normal(rng);
            }
        }
        const double nu = pesv_norm(p);
        const double target = unit(rng);
        if (!(nu > 0.0)) {
            continue;
        }
        for (double& v : p.output().data()) {
            v *= target / nu;
        }
        std::vector<double> f = forward(p, act, grid);
        const bool separated = std::all_of(centers.begin(), centers.end(), [&](const std::vector<double>& c) {
            double dist = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) {
                dist = std::max(dist, std::abs(f[i] - c[i]));
            }
            return dist > delta;
        });
        if (separated) {
            centers.push_back(std::move(f));
        }
    }
    r.packing = std::max<std::size_t>(centers.size(), 1);
    r.log_packing = std::log(static_cast<double>(r.packing));
    r.entropy_bound =
        theory::metric_entropy_bound(delta / 2.0, widths, static_cast<double>(input_dim), act.lipschitz());
    r.pass = r.log_packing <= r.entropy_bound;
    return r;
}

} // namespace pesvlab::oracles

#endif // PESVLAB_ORACLES_COVERING_HPP

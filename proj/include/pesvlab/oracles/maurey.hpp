#ifndef PESVLAB_ORACLES_MAUREY_HPP
#define PESVLAB_ORACLES_MAUREY_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "../errors.hpp"
#include "../matrix.hpp"

namespace pesvlab::oracles {

struct MaureyResult {
    double mean_sq_error{0.0};
    double standard_error{0.0};
    double radius{0.0};  // R = max_i ||g_i||
    double bound{0.0};   // R^2 / m
    double threshold{0.0};  // bound * (1 + 3 / sqrt(trials))
    bool pass{false};
};

/// Empirical check of m-term sampling: draw m atoms iid from the convex weights and measure
/// ||f - (1/m) sum sampled||^2 against R^2 / m, where f = sum_i weights_i g_i.
[[nodiscard]] inline MaureyResult maurey_sampling_check(const Matrix& atoms, const std::vector<double>& weights,
                                                        std::size_t m, std::size_t trials, std::uint64_t seed)
{
    if (atoms.rows() == 0 || weights.size() != atoms.rows()) {
        throw DomainError("need one weight per atom");
    }
    if (m == 0 || trials < 2) {
        throw DomainError("need m >= 1 and at least two trials");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) {
            throw DomainError("weights must be nonnegative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw DomainError("weights must sum to one");
    }
    const std::size_t dim = atoms.cols();
    std::vector<double> target(dim, 0.0);
    double radius = 0.0;
    for (std::size_t i = 0; i < atoms.rows(); ++i) {
        radius = std::max(radius, norm2(atoms.row(i)));
        for (std::size_t c = 0; c < dim; ++c) {
            target[c] += weights[i] * atoms(i, c);
        }
    }
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::vector<double> avg(dim);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        std::fill(avg.begin(), avg.end(), 0.0);
        for (std::size_t s = 0; s < m; ++s) {
            auto g = atoms.row(pick(rng));
            for (std::size_t c = 0; c < dim; ++c) {
                avg[c] += g[c];
            }
        }
        double err = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double diff = avg[c] / static_cast<double>(m) - target[c];
            err += diff * diff;
        }
        const double delta = err - mean;
        mean += delta / static_cast<double>(t + 1);
        m2 += delta * (err - mean);
    }
    MaureyResult r;
    r.mean_sq_error = mean;
    r.standard_error = std::sqrt(m2 / static_cast<double>(trials - 1) / static_cast<double>(trials));
    r.radius = radius;
    r.bound = radius * radius / static_cast<double>(m);
    r.threshold = r.bound * (1.0 + 3.0 / std::sqrt(static_cast<double>(trials)));
    r.pass = r.mean_sq_error <= r.threshold;
    return r;
}

} // namespace pesvlab::oracles

#endif // PESVLAB_ORACLES_MAUREY_HPP

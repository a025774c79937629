#ifndef PESVLAB_ORACLES_POINTWISE_HPP
#define PESVLAB_ORACLES_POINTWISE_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "../activation.hpp"
#include "../errors.hpp"
#include "../network.hpp"
#include "../norms.hpp"

namespace pesvlab::oracles {

struct PointwiseResult {
    double max_ratio{0.0};
    std::size_t probes{0};
    bool pass{false};
};

/// Audits |f(x~)| <= L_sigma^{L-1} ||x~||_2 nu(theta) on probes drawn uniformly from the unit ball of R^{d+1}.
[[nodiscard]] inline PointwiseResult pointwise_norm_check(const NetParams& params, const Activation& act,
                                                          std::size_t probe_count, std::uint64_t seed,
                                                          double slack = 1e-9)
{
    if (!act.normalized()) {
        throw DomainError("pointwise bound needs sigma(0) = 0");
    }
    const std::size_t dim = params.input_dim() + 1;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix probes(probe_count, dim);
    std::vector<double> norms(probe_count);
    for (std::size_t i = 0; i < probe_count; ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            probes(i, j) = normal(rng);
            sq += probes(i, j) * probes(i, j);
        }
        const double scale = std::pow(unit(rng), 1.0 / static_cast<double>(dim)) / std::sqrt(sq);
        for (std::size_t j = 0; j < dim; ++j) {
            probes(i, j) *= scale;
        }
        norms[i] = norm2(probes.row(i));
    }
    const auto out = forward(params, act, probes);
    const double nu = pesv_norm(params);
    const double factor = std::pow(act.lipschitz(), static_cast<double>(params.depth()) - 1.0);
    PointwiseResult r;
    r.probes = probe_count;
    for (std::size_t i = 0; i < probe_count; ++i) {
        if (norms[i] == 0.0) {
            continue;
        }
        if (nu == 0.0) {
            if (out[i] != 0.0) {
                throw std::logic_error("network with zero PeSV norm produced a nonzero output");
            }
            continue;
        }
        r.max_ratio = std::max(r.max_ratio, std::abs(out[i]) / (factor * norms[i] * nu));
    }
    r.pass = r.max_ratio <= 1.0 + slack;
    return r;
}

} // namespace pesvlab::oracles

#endif // PESVLAB_ORACLES_POINTWISE_HPP

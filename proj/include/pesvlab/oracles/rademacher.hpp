#ifndef PESVLAB_ORACLES_RADEMACHER_HPP
#define PESVLAB_ORACLES_RADEMACHER_HPP

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

struct RademacherOptions {
    std::size_t trials{200};
    std::size_t starts{16};
    std::size_t inner_iters{200};
    double step{0.1};
    std::uint64_t seed{0};
};

struct RademacherResult {
    double estimate{0.0};  // mean over trials of the best found sup
    double standard_error{0.0};
    double bound{0.0};  // with the c passed in
    double ratio{0.0};  // estimate / bound
    double c_hat{0.0};  // estimate / (2^{L-1} L_sigma^{L-1} F sqrt(d n))
    std::vector<double> per_trial;
};

namespace detail {

// Scale the output row so that nu = 1; nu is linear in |a|, so any activation works.
inline bool normalize_to_unit_ball(NetParams& p)
{
    const double nu = pesv_norm(p);
    if (!(nu > 0.0) || !std::isfinite(nu)) {
        return false;
    }
    for (double& v : p.output().data()) {
        v /= nu;
    }
    return true;
}

inline NetParams random_start(std::size_t d, const WidthVector& widths, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    NetParams p = NetParams::zeros(d, widths);
    for (std::size_t l = 0; l < p.layer_count(); ++l) {
        const double s = 1.0 / std::sqrt(static_cast<double>(p.layer(l).cols()));
        for (double& v : p.layer(l).data()) {
            v = s * normal(rng);
        }
    }
    return p;
}

} // namespace detail

/// Monte Carlo estimate of E_rho sup_{nu(theta) <= F} |sum_i rho_i f(x_i; theta)|.
///
/// The inner sup is searched by multi-start subgradient ascent on the unit ball (the output row
/// is rescaled to nu = 1 after every step) and every visited point is feasible, so each trial
/// value is a lower bound on the true sup. The class is symmetric under a -> -a, so maximizing
/// the signed sum also maximizes its absolute value. The sup scales linearly in F.
[[nodiscard]] inline RademacherResult rademacher_mc(const WidthVector& widths, double radius, const Matrix& inputs,
                                                    const Activation& act, const RademacherOptions& options,
                                                    double c = 1.0)
{
    if (!(radius >= 0.0)) {
        throw DomainError("class radius must be nonnegative");
    }
    if (options.trials < 2 || options.starts == 0) {
        throw DomainError("need at least two trials and one start");
    }
    const std::size_t n = inputs.rows();
    const std::size_t d = inputs.cols() - 1;
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            sq += inputs(i, j) * inputs(i, j);
        }
        if (sq > 1.0 + 1e-12) {
            throw DomainError("inputs must satisfy ||x_i|| <= 1");
        }
    }
    std::mt19937_64 rng(options.seed);
    std::bernoulli_distribution coin(0.5);
    std::vector<double> rho(n);
    RademacherResult r;
    r.per_trial.reserve(options.trials);
    for (std::size_t t = 0; t < options.trials; ++t) {
        for (double& s : rho) {
            s = coin(rng) ? 1.0 : -1.0;
        }
        double best = 0.0;
        for (std::size_t s = 0; s < options.starts; ++s) {
            NetParams p = detail::random_start(d, widths, rng);
            if (!detail::normalize_to_unit_ball(p)) {
                continue;
            }
            for (std::size_t it = 0; it <= options.inner_iters; ++it) {
                const auto trace = pesvlab::detail::forward_trace(p, act, inputs);
                const Matrix& out = trace.pre.back();
                double value = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    value += rho[i] * out(i, 0);
                }
                best = std::max(best, std::abs(value));
                if (it == options.inner_iters) {
                    break;
                }
                // Ascend on the side of the current sign; a -> -a flips it for free.
                const double dir = value >= 0.0 ? 1.0 : -1.0;
                std::vector<double> up(rho);
                for (double& u : up) {
                    u *= dir;
                }
                NetParams g = backprop(p, act, trace, up);
                const double gn = g.frobenius_norm();
                if (!(gn > 0.0)) {
                    break;
                }
                const double eta = options.step / std::sqrt(1.0 + static_cast<double>(it));
                p.axpy(eta / gn, g);
                if (!detail::normalize_to_unit_ball(p)) {
                    break;
                }
            }
        }
        r.per_trial.push_back(radius * best);
    }
    double mean = 0.0, m2 = 0.0;
    for (std::size_t t = 0; t < r.per_trial.size(); ++t) {
        const double v = r.per_trial[t];
        const double delta = v - mean;
        mean += delta / static_cast<double>(t + 1);
        m2 += delta * (v - mean);
    }
    r.estimate = mean;
    r.standard_error = std::sqrt(m2 / static_cast<double>(r.per_trial.size() - 1) /
                                 static_cast<double>(r.per_trial.size()));
    r.bound = theory::rademacher_bound(widths, radius, static_cast<double>(d), static_cast<double>(n), act.lipschitz(), c);
    r.ratio = r.bound > 0.0 ? r.estimate / r.bound : 0.0;
    const double unit = theory::rademacher_bound(widths, radius, static_cast<double>(d), static_cast<double>(n),
                                                 act.lipschitz(), 1.0);
    r.c_hat = unit > 0.0 ? r.estimate / unit : 0.0;
    return r;
}

} // namespace pesvlab::oracles

#endif // PESVLAB_ORACLES_RADEMACHER_HPP

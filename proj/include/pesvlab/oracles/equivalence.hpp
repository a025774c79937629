#ifndef PESVLAB_ORACLES_EQUIVALENCE_HPP
#define PESVLAB_ORACLES_EQUIVALENCE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "../activation.hpp"
#include "../data.hpp"
#include "../errors.hpp"
#include "../loss.hpp"
#include "../norms.hpp"
#include "../train.hpp"

namespace pesvlab::oracles {

struct EquivalenceOptions {
    TrainOptions train{};
    double init_gain{1.0};
    double tolerance{0.05};  // on the median weight-decay gap
};

/// One seed. Objectives: J uses lambda * nu, J' uses lambda_wd * ||theta||^2, J'' uses
/// lambda_mixed * mixed_max(1, 2).
struct EquivalenceRow {
    std::uint64_t seed{0};
    double lambda_wd{0.0};
    double lambda_mixed{0.0};
    double pesv_objective{0.0};        // J at the direct PeSV minimizer
    double wd_objective{0.0};          // J' at the weight-decay minimizer
    double mixed_objective{0.0};       // J'' at the mixed-max minimizer
    double wd_as_pesv{0.0};            // J at the balanced weight-decay minimizer
    double mixed_as_pesv{0.0};         // J at the mixed-max minimizer
    double pesv_as_wd{0.0};            // J' at the balanced PeSV minimizer
    double pesv_as_mixed{0.0};         // J'' at the max-norm rescaled PeSV minimizer
    double gap_wd{0.0};                // |wd_as_pesv - pesv_objective| / pesv_objective
    double gap_mixed{0.0};             // |mixed_as_pesv - pesv_objective| / pesv_objective
};

struct EquivalenceResult {
    std::vector<EquivalenceRow> rows;
    double median_gap_wd{0.0};
    double median_gap_mixed{0.0};
    bool pass{false};
};

namespace detail {

inline double median(std::vector<double> v)
{
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline double relative_gap(double value, double reference)
{
    const double diff = std::abs(value - reference);
    return reference > 0.0 ? diff / reference : diff;
}

} // namespace detail

/// Trains the same initialization under the three penalties and cross-evaluates the minimizers.
///
/// Penalty weights are matched at the PeSV minimizer theta*: lambda_wd = (lambda / 2) nu*^{(L-2)/L}
/// and lambda_mixed = L lambda nu*^{(L-1)/L}, so that the rescaling-minimized penalties have the
/// same slope in nu as lambda * nu there. At L = 2, lambda_wd = lambda / 2 exactly.
[[nodiscard]] inline EquivalenceResult equivalence_check_relu(const Dataset& data, double lambda,
                                                              const WidthVector& widths,
                                                              const std::vector<std::uint64_t>& seeds,
                                                              const EquivalenceOptions& options = {})
{
    if (!(lambda >= 0.0)) {
        throw DomainError("regularization weight must be nonnegative");
    }
    const Activation act = Activation::relu();
    const LossSpec loss = LossSpec::mse();
    const auto pesv = Regularizer::pesv();
    const auto wd = Regularizer::weight_decay();
    const auto mixed = Regularizer::mixed_max(1.0, 2.0);
    const double depth = static_cast<double>(widths.depth());

    EquivalenceResult result;
    std::vector<double> gaps_wd, gaps_mixed;
    for (std::uint64_t seed : seeds) {
        const NetParams init = init_uniform(data.input_dim(), widths, seed, options.init_gain);
        TrainOptions opts = options.train;
        opts.seed = seed;
        EquivalenceRow row;
        row.seed = seed;

        const TrainResult direct = train(init, act, data, lambda, loss, pesv, opts);
        const double nu_star = pesv_norm(direct.params);
        row.lambda_wd = 0.5 * lambda * std::pow(nu_star, (depth - 2.0) / depth);
        row.lambda_mixed = depth * lambda * std::pow(nu_star, (depth - 1.0) / depth);
        row.pesv_objective = direct.best_objective;

        const TrainResult by_wd = train(init, act, data, row.lambda_wd, loss, wd, opts);
        row.wd_objective = by_wd.best_objective;
        row.wd_as_pesv = objective(balance_relu(by_wd.params, act), act, data, lambda, loss, pesv);

        const TrainResult by_mixed = train(init, act, data, row.lambda_mixed, loss, mixed, opts);
        row.mixed_objective = by_mixed.best_objective;
        row.mixed_as_pesv = objective(by_mixed.params, act, data, lambda, loss, pesv);

        const NetParams balanced = balance_relu(direct.params, act);
        row.pesv_as_wd = objective(balanced, act, data, row.lambda_wd, loss, wd);
        row.pesv_as_mixed = nu_star > 0.0
                                ? objective(canonical_max_norm_rescaling(direct.params, act), act, data,
                                            row.lambda_mixed, loss, mixed)
                                : objective(direct.params, act, data, row.lambda_mixed, loss, mixed);

        row.gap_wd = detail::relative_gap(row.wd_as_pesv, row.pesv_objective);
        row.gap_mixed = detail::relative_gap(row.mixed_as_pesv, row.pesv_objective);
        gaps_wd.push_back(row.gap_wd);
        gaps_mixed.push_back(row.gap_mixed);
        result.rows.push_back(row);
    }
    result.median_gap_wd = detail::median(gaps_wd);
    result.median_gap_mixed = detail::median(gaps_mixed);
    result.pass = result.median_gap_wd <= options.tolerance;
    return result;
}

} // namespace pesvlab::oracles

#endif // PESVLAB_ORACLES_EQUIVALENCE_HPP

#ifndef PESVLAB_TRAIN_HPP
#define PESVLAB_TRAIN_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "data.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "loss.hpp"
#include "network.hpp"
#include "norms.hpp"

namespace pesvlab {

/// Penalty attached to the empirical risk.
struct Regularizer {
    enum class Kind { pesv, weight_decay, mixed_max };
    Kind kind{Kind::pesv};
    double p{1.0};
    double q{2.0};

    static Regularizer pesv() { return {Kind::pesv}; }
    static Regularizer weight_decay() { return {Kind::weight_decay}; }
    static Regularizer mixed_max(double p = 1.0, double q = 2.0) { return {Kind::mixed_max, p, q}; }

    [[nodiscard]] double value(const NetParams& params) const
    {
        switch (kind) {
        case Kind::pesv: return pesv_norm(params);
        case Kind::weight_decay: return weight_decay_norm(params);
        case Kind::mixed_max: return mixed_max_norm(params, p, q);
        }
        return 0.0;
    }

    [[nodiscard]] NetParams subgradient(const NetParams& params) const
    {
        switch (kind) {
        case Kind::pesv: return pesv_subgradient(params);
        case Kind::weight_decay: {
            NetParams g = params;
            g.scale(2.0);
            return g;
        }
        case Kind::mixed_max: return mixed_max_subgradient(params, p, q);
        }
        return params;
    }

    [[nodiscard]] std::string name() const
    {
        switch (kind) {
        case Kind::pesv: return "pesv";
        case Kind::weight_decay: return "weight_decay";
        case Kind::mixed_max: return "mixed_max";
        }
        return "unknown";
    }
};

/// (1/n) sum_i L(g(x_i), y_i) + lambda * reg(theta). With mse this is (1/2n) sum (y - g)^2 + lambda nu.
[[nodiscard]] inline double objective(const NetParams& params, const Activation& act, const Dataset& data,
                                      double lambda, const LossSpec& loss, const Regularizer& reg)
{
    if (!(lambda >= 0.0)) {
        throw DomainError("regularization weight must be nonnegative");
    }
    const auto pred = forward(params, act, data.inputs);
    double risk = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        risk += loss.value(pred[i], data.targets[i]);
    }
    risk /= static_cast<double>(pred.size());
    return lambda == 0.0 ? risk : risk + lambda * reg.value(params);
}

enum class StepSchedule { inverse_sqrt, constant };

struct TrainOptions {
    double step_size{0.1};
    StepSchedule schedule{StepSchedule::inverse_sqrt};
    double decay_horizon{1.0};  // eta_t = step / sqrt(1 + t / horizon)
    std::size_t max_iters{1000};
    double tolerance{0.0};  // stop once ||subgradient|| <= tolerance (1 + ||theta||)
    std::uint64_t seed{0};
};

struct TraceRow {
    std::size_t iteration;
    double objective;
    double empirical_mse;
    double nu;
};

struct TrainResult {
    NetParams params;  // best iterate along the trace
    std::vector<TraceRow> trace;
    std::size_t best_iteration{0};
    double best_objective{0.0};
    double final_subgradient_norm{0.0};
};

/// Thrown when the objective stops being finite; carries the last finite iterate.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, NetParams last_finite, std::vector<TraceRow> trace)
        : std::runtime_error(what), last_finite_(std::move(last_finite)), trace_(std::move(trace))
    {
    }

    [[nodiscard]] const NetParams& last_finite() const noexcept { return last_finite_; }
    [[nodiscard]] const std::vector<TraceRow>& trace() const noexcept { return trace_; }

private:
    NetParams last_finite_;
    std::vector<TraceRow> trace_;
};

namespace detail {

struct Evaluation {
    double objective;
    double empirical_mse;
    double nu;
    NetParams subgradient;
};

inline Evaluation evaluate(const NetParams& params, const Activation& act, const Dataset& data, double lambda,
                           const LossSpec& loss, const Regularizer& reg, bool with_gradient)
{
    const auto trace = forward_trace(params, act, data.inputs);
    const Matrix& out = trace.pre.back();
    const std::size_t n = data.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> upstream(n);
    double risk = 0.0, mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = out(i, 0);
        const double y = data.targets[i];
        risk += loss.value(f, y);
        mse += (f - y) * (f - y);
        upstream[i] = loss.d_predictor(f, y) * inv_n;
    }
    Evaluation e;
    e.nu = pesv_norm(params);
    const double penalty = reg.kind == Regularizer::Kind::pesv ? e.nu : reg.value(params);
    e.objective = risk * inv_n + (lambda == 0.0 ? 0.0 : lambda * penalty);
    e.empirical_mse = mse * inv_n;
    if (with_gradient) {
        e.subgradient = backprop(params, act, trace, upstream);
        if (lambda != 0.0) {
            e.subgradient.axpy(lambda, reg.subgradient(params));
        }
    }
    return e;
}

} // namespace detail

/// Full-batch subgradient descent with best-iterate return.
///
/// The trace holds one row per evaluated iterate theta_0 .. theta_T.
[[nodiscard]] inline TrainResult train(const NetParams& init, const Activation& act, const Dataset& data,
                                       double lambda, const LossSpec& loss, const Regularizer& reg,
                                       const TrainOptions& options)
{
    if (!(options.step_size > 0.0) || !(options.decay_horizon > 0.0)) {
        throw DomainError("step size and decay horizon must be positive");
    }
    if (options.max_iters == 0) {
        throw DomainError("max_iters must be at least 1");
    }
    if (!(lambda >= 0.0)) {
        throw DomainError("regularization weight must be nonnegative");
    }
    if (init.input_dim() != data.input_dim()) {
        throw ShapeError("network and dataset input dimensions differ");
    }
    TrainResult result;
    result.best_objective = std::numeric_limits<double>::infinity();
    result.trace.reserve(options.max_iters + 1);
    NetParams theta = init;
    NetParams last_finite = init;
    for (std::size_t t = 0; t <= options.max_iters; ++t) {
        const bool last = t == options.max_iters;
        auto eval = detail::evaluate(theta, act, data, lambda, loss, reg, !last);
        if (!std::isfinite(eval.objective) || !theta.all_finite()) {
            throw DivergenceError("objective became non-finite at iteration " + std::to_string(t),
                                  std::move(last_finite), std::move(result.trace));
        }
        result.trace.push_back({t, eval.objective, eval.empirical_mse, eval.nu});
        if (eval.objective < result.best_objective) {
            result.best_objective = eval.objective;
            result.best_iteration = t;
            result.params = theta;
        }
        if (last) {
            break;
        }
        const double gnorm = eval.subgradient.frobenius_norm();
        result.final_subgradient_norm = gnorm;
        if (options.tolerance > 0.0 && gnorm <= options.tolerance * (1.0 + theta.frobenius_norm())) {
            break;
        }
        const double eta = options.schedule == StepSchedule::constant
                               ? options.step_size
                               : options.step_size / std::sqrt(1.0 + static_cast<double>(t) / options.decay_horizon);
        last_finite = theta;
        theta.axpy(-eta, eval.subgradient);
    }
    return result;
}

/// iteration,objective,empirical_mse,nu
[[nodiscard]] inline std::string trace_csv(const std::vector<TraceRow>& trace)
{
    std::string s = "iteration,objective,empirical_mse,nu\n";
    for (const auto& r : trace) {
        s += std::to_string(r.iteration) + "," + format_double(r.objective) + "," + format_double(r.empirical_mse) +
             "," + format_double(r.nu) + "\n";
    }
    return s;
}

/// ||g(.; theta) - f*||_n^2: mean squared deviation from the noiseless teacher on the training inputs.
[[nodiscard]] inline double empirical_error(const NetParams& params, const Activation& act, const TeacherSpec& teacher,
                                            const Dataset& data)
{
    const auto g = forward(params, act, data.inputs);
    const auto f = teacher(data.inputs);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        s += (g[i] - f[i]) * (g[i] - f[i]);
    }
    return s / static_cast<double>(g.size());
}

struct McEstimate {
    double mean{0.0};
    double standard_error{0.0};
    std::size_t samples{0};
};

/// Monte Carlo estimate of ||g - f*||_2^2 over fresh inputs, with the standard error of the mean.
[[nodiscard]] inline McEstimate generalization_error_mc(const NetParams& params, const Activation& act,
                                                        const TeacherSpec& teacher, std::size_t n_test,
                                                        std::uint64_t seed,
                                                        InputDistribution dist = InputDistribution::uniform_ball)
{
    if (n_test < 2) {
        throw DomainError("Monte Carlo estimate needs at least two test points");
    }
    Rng rng(seed);
    const Matrix x = sample_inputs(n_test, teacher.input_dim(), dist, rng);
    const auto g = forward(params, act, x);
    const auto f = teacher(x);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n_test; ++i) {
        const double v = (g[i] - f[i]) * (g[i] - f[i]);
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
    }
    const double var = m2 / static_cast<double>(n_test - 1);
    return {mean, std::sqrt(var / static_cast<double>(n_test)), n_test};
}

} // namespace pesvlab

#endif // PESVLAB_TRAIN_HPP

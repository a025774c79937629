#ifndef PESVLAB_LOSS_HPP
#define PESVLAB_LOSS_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace pesvlab {

enum class LossKind { mse, logistic, huber };

[[nodiscard]] inline std::string to_string(LossKind kind)
{
    switch (kind) {
    case LossKind::mse: return "mse";
    case LossKind::logistic: return "logistic";
    case LossKind::huber: return "huber";
    }
    return "unknown";
}

/// Bound on the predictions and targets a loss is evaluated on: the pointwise network bound
/// L_sigma^{L-1} ||x~|| nu with ||x~|| <= sqrt(2), plus a 6 sigma noise cap.
[[nodiscard]] inline double working_range(double nu, double lipschitz, std::size_t depth, double noise_std)
{
    return std::pow(lipschitz, static_cast<double>(depth) - 1.0) * std::sqrt(2.0) * nu + 6.0 * noise_std;
}

/// A loss L(f, y) normalized so that L(y, y) = 0, with the Lipschitz, curvature and strong
/// convexity constants it satisfies on the box |f|, |y| <= range.
class LossSpec {
public:
    /// L(f, y) = (f - y)^2 / 2.
    static LossSpec mse(double range = 1.0)
    {
        LossSpec s(LossKind::mse, range);
        s.l0_ = 2.0 * std::sqrt(2.0) * range;
        s.l1y_ = std::sqrt(2.0);
        s.b_ = 1.0;
        s.gamma_ = 1.0;
        return s;
    }

    /// Cross entropy against the soft label sigmoid(y), minus its value at f = y.
    static LossSpec logistic(double range = 1.0)
    {
        LossSpec s(LossKind::logistic, range);
        constexpr double max_s2 = 0.09622504486493763;  // max |sigmoid''| = 1/(6 sqrt 3)
        const double dy = range / 2.0;
        s.l0_ = std::sqrt(std::pow(std::min(1.0, range / 2.0), 2) + dy * dy);
        s.b_ = max_s2 * 2.0 * range + 0.25;
        s.l1y_ = std::sqrt(0.0625 + s.b_ * s.b_);
        const double sr = sigmoid(range);
        s.gamma_ = sr * (1.0 - sr);
        return s;
    }

    static LossSpec huber(double delta, double range = 1.0)
    {
        if (!(delta > 0.0)) {
            throw DomainError("huber threshold must be positive");
        }
        LossSpec s(LossKind::huber, range);
        s.delta_ = delta;
        s.l0_ = std::sqrt(2.0) * std::min(2.0 * range, delta);
        s.l1y_ = std::sqrt(2.0);
        s.b_ = 1.0;
        s.gamma_ = std::min(1.0, delta / (2.0 * range));
        return s;
    }

    [[nodiscard]] double value(double f, double y) const noexcept
    {
        switch (kind_) {
        case LossKind::mse: return 0.5 * (f - y) * (f - y);
        case LossKind::logistic: return softplus(f) - softplus(y) - sigmoid(y) * (f - y);
        case LossKind::huber: {
            const double r = std::abs(f - y);
            return r <= delta_ ? 0.5 * r * r : delta_ * (r - 0.5 * delta_);
        }
        }
        return 0.0;
    }

    /// dL/df
    [[nodiscard]] double d_predictor(double f, double y) const noexcept
    {
        switch (kind_) {
        case LossKind::mse: return f - y;
        case LossKind::logistic: return sigmoid(f) - sigmoid(y);
        case LossKind::huber: return std::clamp(f - y, -delta_, delta_);
        }
        return 0.0;
    }

    /// dL/dy
    [[nodiscard]] double d_target(double f, double y) const noexcept
    {
        switch (kind_) {
        case LossKind::mse: return y - f;
        case LossKind::logistic: {
            const double s = sigmoid(y);
            return -s * (1.0 - s) * (f - y);
        }
        case LossKind::huber: return -std::clamp(f - y, -delta_, delta_);
        }
        return 0.0;
    }

    /// Same loss, constants recomputed for another working range.
    [[nodiscard]] LossSpec with_range(double range) const
    {
        switch (kind_) {
        case LossKind::mse: return mse(range);
        case LossKind::logistic: return logistic(range);
        case LossKind::huber: return huber(delta_, range);
        }
        return *this;
    }

    /// Same evaluators with caller-supplied constants, e.g. tighter ones known for a given range.
    [[nodiscard]] LossSpec with_constants(double l0, double l1y, double b, double gamma) const
    {
        if (!(l0 >= 0.0) || !(l1y >= 0.0) || !(b >= 0.0) || !(gamma >= 0.0)) {
            throw DomainError("loss constants must be nonnegative");
        }
        LossSpec s = *this;
        s.l0_ = l0;
        s.l1y_ = l1y;
        s.b_ = b;
        s.gamma_ = gamma;
        return s;
    }

    [[nodiscard]] LossKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::string name() const { return to_string(kind_); }
    [[nodiscard]] double range() const noexcept { return range_; }
    [[nodiscard]] double huber_delta() const noexcept { return delta_; }
    [[nodiscard]] double lipschitz() const noexcept { return l0_; }          // L_0
    [[nodiscard]] double target_lipschitz() const noexcept { return l1y_; }  // L_{1,y}
    [[nodiscard]] double curvature_bound() const noexcept { return b_; }     // B
    [[nodiscard]] double strong_convexity() const noexcept { return gamma_; }

    static double sigmoid(double t) noexcept
    {
        if (t >= 0.0) {
            return 1.0 / (1.0 + std::exp(-t));
        }
        const double e = std::exp(t);
        return e / (1.0 + e);
    }

    static double softplus(double t) noexcept { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

private:
    LossSpec(LossKind kind, double range) : kind_(kind), range_(range)
    {
        if (!(range > 0.0) || !std::isfinite(range)) {
            throw DomainError("loss working range must be positive");
        }
    }

    LossKind kind_;
    double range_;
    double delta_{1.0};
    double l0_{1.0};
    double l1y_{1.0};
    double b_{1.0};
    double gamma_{1.0};
};

} // namespace pesvlab

#endif // PESVLAB_LOSS_HPP

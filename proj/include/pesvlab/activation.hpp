#ifndef PESVLAB_ACTIVATION_HPP
#define PESVLAB_ACTIVATION_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pesvlab {

enum class ActivationKind { relu, identity, leaky_relu, tabulated };

[[nodiscard]] inline std::string to_string(ActivationKind kind)
{
    switch (kind) {
    case ActivationKind::relu: return "relu";
    case ActivationKind::identity: return "identity";
    case ActivationKind::leaky_relu: return "leaky-relu";
    case ActivationKind::tabulated: return "tabulated";
    }
    return "unknown";
}

/// A Lipschitz activation sigma(x) = base(x) + shift.
///
/// The base is relu, identity, leaky relu, or a piecewise-linear table extended linearly
/// beyond its end knots. The Lipschitz constant is exact for all kinds (max slope for tables).
class Activation {
public:
    static Activation relu() { return Activation(ActivationKind::relu); }
    static Activation identity() { return Activation(ActivationKind::identity); }

    static Activation leaky_relu(double alpha)
    {
        if (!(alpha >= 0.0 && alpha <= 1.0)) {
            throw DomainError("leaky-relu slope must lie in [0, 1]");
        }
        Activation a(ActivationKind::leaky_relu);
        a.alpha_ = alpha;
        return a;
    }

    /// Piecewise-linear interpolation through (grid[i], values[i]); grid strictly increasing.
    /// A table built without its derivative cannot be backpropagated through.
    static Activation tabulated(std::vector<double> grid, std::vector<double> values, bool with_derivative = true)
    {
        if (grid.size() < 2 || grid.size() != values.size()) {
            throw DomainError("tabulated activation needs at least two knots and matching values");
        }
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (!(grid[i] > grid[i - 1])) {
                throw DomainError("tabulated activation grid must be strictly increasing");
            }
        }
        Activation a(ActivationKind::tabulated);
        a.slopes_.resize(grid.size() - 1);
        double lip = 0.0;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            a.slopes_[i] = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
            lip = std::max(lip, std::abs(a.slopes_[i]));
        }
        if (!(lip > 0.0)) {
            throw DomainError("tabulated activation must not be constant");
        }
        a.grid_ = std::move(grid);
        a.values_ = std::move(values);
        a.differentiable_ = with_derivative;
        a.table_lipschitz_ = lip;
        return a;
    }

    /// The same activation plus a constant.
    [[nodiscard]] Activation shifted(double offset) const
    {
        Activation a = *this;
        a.shift_ += offset;
        return a;
    }

    [[nodiscard]] double operator()(double x) const noexcept { return base(x) + shift_; }

    /// Almost-everywhere derivative; relu and leaky relu take the left slope at 0.
    [[nodiscard]] double derivative(double x) const
    {
        switch (kind_) {
        case ActivationKind::relu: return x > 0.0 ? 1.0 : 0.0;
        case ActivationKind::identity: return 1.0;
        case ActivationKind::leaky_relu: return x > 0.0 ? 1.0 : alpha_;
        case ActivationKind::tabulated:
            if (!differentiable_) {
                throw UnsupportedError("tabulated activation was built without a derivative table");
            }
            return slopes_[segment(x)];
        }
        return 0.0;
    }

    [[nodiscard]] ActivationKind kind() const noexcept { return kind_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double shift() const noexcept { return shift_; }
    [[nodiscard]] const std::vector<double>& grid() const noexcept { return grid_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] bool differentiable() const noexcept { return differentiable_; }

    [[nodiscard]] double lipschitz() const noexcept
    {
        switch (kind_) {
        case ActivationKind::relu:
        case ActivationKind::identity:
        case ActivationKind::leaky_relu: return 1.0;
        case ActivationKind::tabulated: return table_lipschitz_;
        }
        return 1.0;
    }

    [[nodiscard]] double at_zero() const noexcept { return (*this)(0.0); }
    [[nodiscard]] bool normalized() const noexcept { return at_zero() == 0.0; }

    /// sigma(c x) = c sigma(x) for all c > 0.
    [[nodiscard]] bool positively_homogeneous() const noexcept
    {
        return kind_ != ActivationKind::tabulated && shift_ == 0.0;
    }

    [[nodiscard]] std::string name() const { return to_string(kind_); }

    friend bool operator==(const Activation&, const Activation&) = default;

private:
    explicit Activation(ActivationKind kind) : kind_(kind) {}

    [[nodiscard]] std::size_t segment(double x) const noexcept
    {
        auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
        std::size_t idx = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
        return std::min(idx, slopes_.size() - 1);
    }

    [[nodiscard]] double base(double x) const noexcept
    {
        switch (kind_) {
        case ActivationKind::relu: return x > 0.0 ? x : 0.0;
        case ActivationKind::identity: return x;
        case ActivationKind::leaky_relu: return x > 0.0 ? x : alpha_ * x;
        case ActivationKind::tabulated: {
            std::size_t s = segment(x);
            return values_[s] + slopes_[s] * (x - grid_[s]);
        }
        }
        return x;
    }

    ActivationKind kind_;
    double alpha_{0.0};
    double shift_{0.0};
    std::vector<double> grid_;
    std::vector<double> values_;
    std::vector<double> slopes_;
    double table_lipschitz_{1.0};
    bool differentiable_{true};
};

} // namespace pesvlab

#endif // PESVLAB_ACTIVATION_HPP

#ifndef PESVLAB_WIDTH_VECTOR_HPP
#define PESVLAB_WIDTH_VECTOR_HPP

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pesvlab {

/// Hidden-layer widths (m_1, ..., m_{L-1}) of a depth-L network.
class WidthVector {
public:
    explicit WidthVector(std::vector<std::size_t> widths) : widths_(std::move(widths))
    {
        if (widths_.empty()) {
            throw DomainError("width vector needs at least one hidden layer");
        }
        for (std::size_t w : widths_) {
            if (w == 0) {
                throw DomainError("hidden widths must be positive");
            }
        }
    }

    WidthVector(std::initializer_list<std::size_t> widths) : WidthVector(std::vector<std::size_t>(widths)) {}

    [[nodiscard]] const std::vector<std::size_t>& widths() const noexcept { return widths_; }
    [[nodiscard]] std::size_t operator[](std::size_t i) const noexcept { return widths_[i]; }
    [[nodiscard]] std::size_t size() const noexcept { return widths_.size(); }

    /// Network depth L = number of hidden layers + 1.
    [[nodiscard]] std::size_t depth() const noexcept { return widths_.size() + 1; }

    /// The width m = max_i m_i.
    [[nodiscard]] std::size_t width() const noexcept { return *std::max_element(widths_.begin(), widths_.end()); }

    /// The bottleneck b = min_i m_i.
    [[nodiscard]] std::size_t bottleneck() const noexcept
    {
        return *std::min_element(widths_.begin(), widths_.end());
    }

    /// m_1 m_2 ... m_{L-1} as a double (products overflow integers quickly in sweeps).
    [[nodiscard]] double product() const noexcept
    {
        double p = 1.0;
        for (std::size_t w : widths_) {
            p *= static_cast<double>(w);
        }
        return p;
    }

    /// Every width multiplied by k.
    [[nodiscard]] WidthVector scaled(std::size_t k) const
    {
        std::vector<std::size_t> out(widths_);
        for (auto& w : out) {
            w *= k;
        }
        return WidthVector(std::move(out));
    }

    [[nodiscard]] std::string to_string() const
    {
        std::string s = "(";
        for (std::size_t i = 0; i < widths_.size(); ++i) {
            s += (i ? "," : "") + std::to_string(widths_[i]);
        }
        return s + ")";
    }

    friend bool operator==(const WidthVector&, const WidthVector&) = default;

private:
    std::vector<std::size_t> widths_;
};

/// Largest elementwise nondecreasing minorant of the width vector.
///
/// Repeatedly takes the minimum of the remaining suffix (the last occurrence on ties),
/// fills every position up to it with that value, and continues after it.
[[nodiscard]] inline WidthVector max_nondecreasing_component(const WidthVector& m)
{
    const auto& w = m.widths();
    std::vector<std::size_t> out(w.size());
    std::size_t start = 0;
    while (start < w.size()) {
        std::size_t arg = start;
        for (std::size_t i = start; i < w.size(); ++i) {
            if (w[i] <= w[arg]) {
                arg = i;
            }
        }
        std::fill(out.begin() + static_cast<std::ptrdiff_t>(start), out.begin() + static_cast<std::ptrdiff_t>(arg) + 1,
                  w[arg]);
        start = arg + 1;
    }
    return WidthVector(std::move(out));
}

} // namespace pesvlab

#endif // PESVLAB_WIDTH_VECTOR_HPP

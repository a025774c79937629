#ifndef PESVLAB_DATA_HPP
#define PESVLAB_DATA_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "format.hpp"
#include "network.hpp"
#include "norms.hpp"
#include "serialization.hpp"

namespace pesvlab {

using Rng = std::mt19937_64;

/// The target network f* and its PeSV norm, which stands in for ||f*|| in the bounds.
class TeacherSpec {
public:
    explicit TeacherSpec(Model teacher) : teacher_(std::move(teacher)), nu_(pesv_norm(teacher_.params)) {}

    [[nodiscard]] const Model& model() const noexcept { return teacher_; }
    [[nodiscard]] const NetParams& params() const noexcept { return teacher_.params; }
    [[nodiscard]] const Activation& activation() const noexcept { return teacher_.activation; }
    [[nodiscard]] double nu() const noexcept { return nu_; }
    [[nodiscard]] std::size_t input_dim() const noexcept { return teacher_.params.input_dim(); }

    [[nodiscard]] std::vector<double> operator()(const Matrix& inputs) const
    {
        return forward(teacher_.params, teacher_.activation, inputs);
    }

private:
    Model teacher_;
    double nu_;
};

enum class InputDistribution { uniform_ball, uniform_sphere };

/// n points x~_i = (x_i, 1) with ||x_i|| <= 1 and targets y_i = f*(x_i) + eps_i.
struct Dataset {
    Matrix inputs;
    std::vector<double> targets;
    double noise_std{0.0};
    std::uint64_t seed{0};
    std::string teacher_hash;

    [[nodiscard]] std::size_t size() const noexcept { return targets.size(); }
    [[nodiscard]] std::size_t input_dim() const noexcept { return inputs.cols() - 1; }
};

/// Draws n points of R^d from the distribution, with the bias coordinate appended.
[[nodiscard]] inline Matrix sample_inputs(std::size_t n, std::size_t d, InputDistribution dist, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix x(n, d + 1);
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            x(i, j) = normal(rng);
            sq += x(i, j) * x(i, j);
        }
        const double norm = std::sqrt(sq);
        const double radius = dist == InputDistribution::uniform_ball ? std::pow(unit(rng), 1.0 / static_cast<double>(d)) : 1.0;
        const double s = norm > 0.0 ? radius / norm : 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            x(i, j) *= s;
        }
        // guard the ||x|| <= 1 invariant against rounding
        double check = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            check += x(i, j) * x(i, j);
        }
        double fix = 1.0;
        while (check > 1.0) {
            fix = std::nextafter(fix, 0.0);
            check = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double v = x(i, j) * fix;
                check += v * v;
            }
        }
        if (fix < 1.0) {
            for (std::size_t j = 0; j < d; ++j) {
                x(i, j) *= fix;
            }
        }
        x(i, d) = 1.0;
    }
    return x;
}

/// Targets from the teacher on given inputs plus iid N(0, sigma^2) noise.
[[nodiscard]] inline Dataset make_dataset(const TeacherSpec& teacher, Matrix inputs, double noise_std, std::uint64_t seed)
{
    if (!(noise_std >= 0.0)) {
        throw DomainError("noise standard deviation must be nonnegative");
    }
    if (inputs.cols() != teacher.input_dim() + 1) {
        throw ShapeError("dataset inputs do not match the teacher's input dimension");
    }
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> noise(0.0, 1.0);
    Dataset ds;
    ds.targets = teacher(inputs);
    if (noise_std > 0.0) {
        for (double& y : ds.targets) {
            y += noise_std * noise(rng);
        }
    }
    ds.inputs = std::move(inputs);
    ds.noise_std = noise_std;
    ds.seed = seed;
    ds.teacher_hash = model_hash(teacher.model());
    return ds;
}

[[nodiscard]] inline Dataset sample_dataset(const TeacherSpec& teacher, std::size_t n, double noise_std,
                                            InputDistribution dist, std::uint64_t seed)
{
    if (n == 0) {
        throw DomainError("dataset needs at least one sample");
    }
    Rng rng(seed);
    Matrix x = sample_inputs(n, teacher.input_dim(), dist, rng);
    return make_dataset(teacher, std::move(x), noise_std, seed);
}

/// CSV with a '#' comment header carrying seed, noise level and teacher hash, then x_1..x_d,bias,y.
[[nodiscard]] inline std::string dataset_csv(const Dataset& ds)
{
    std::string s = "# seed=" + std::to_string(ds.seed) + ",sigma_eps=" + format_double(ds.noise_std) +
                    ",teacher=" + ds.teacher_hash + "\n";
    const std::size_t d = ds.input_dim();
    for (std::size_t j = 0; j < d; ++j) {
        s += "x_" + std::to_string(j + 1) + ",";
    }
    s += "bias,y\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j <= d; ++j) {
            s += format_double(ds.inputs(i, j)) + ",";
        }
        s += format_double(ds.targets[i]) + "\n";
    }
    return s;
}

/// iid uniform(-s, s) weights with s = 1/sqrt(fan-in).
[[nodiscard]] inline NetParams init_uniform(std::size_t input_dim, const WidthVector& widths, std::uint64_t seed,
                                            double gain = 1.0)
{
    Rng rng(seed);
    NetParams p = NetParams::zeros(input_dim, widths);
    for (std::size_t l = 0; l < p.layer_count(); ++l) {
        Matrix& w = p.layer(l);
        const double s = gain / std::sqrt(static_cast<double>(w.cols()));
        std::uniform_real_distribution<double> u(-s, s);
        for (double& v : w.data()) {
            v = u(rng);
        }
    }
    return p;
}

} // namespace pesvlab

#endif // PESVLAB_DATA_HPP

#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <pesvlab/loss.hpp>
#include <pesvlab/theory.hpp>

using namespace pesvlab;
using namespace pesvlab::theory;

namespace {

BoundConfig relu_config(double noise)
{
    BoundConfig c;
    c.n = 1e4;
    c.d = 1;
    c.depth = 2;
    c.noise_std = noise;
    c.target_norm = 1.0;
    return c;
}

std::vector<std::size_t> range(std::size_t lo, std::size_t hi)
{
    std::vector<std::size_t> v;
    for (std::size_t m = lo; m <= hi; ++m) {
        v.push_back(m);
    }
    return v;
}

} // namespace

TEST(HOfM, Examples)
{
    EXPECT_DOUBLE_EQ(h_of_m(WidthVector{4}, 1.0), 0.5);
    EXPECT_NEAR(h_of_m(WidthVector{4, 9}, 1.0), 1.4513673, 1e-7);
    EXPECT_NEAR(h_of_m(WidthVector{9, 4}, 1.0), 1.6180340, 1e-7);
    // only the nondecreasing minorant matters
    EXPECT_DOUBLE_EQ(h_of_m(WidthVector{9, 4}, 1.0), h_of_m(WidthVector{4, 4}, 1.0));
}

TEST(HOfM, NonincreasingInEachWidth)
{
    for (std::size_t a = 1; a <= 12; ++a) {
        for (std::size_t b = 1; b <= 12; ++b) {
            const double h = h_of_m(WidthVector{a, b}, 1.0);
            EXPECT_LE(h_of_m(WidthVector{a + 1, b}, 1.0), h);
            EXPECT_LE(h_of_m(WidthVector{a, b + 1}, 1.0), h);
        }
    }
}

TEST(Approximation, L2)
{
    EXPECT_DOUBLE_EQ(approx_bound_l2(WidthVector{4}, 1.0, 1.0, 1.0), 1.5);
    EXPECT_EQ(approx_bound_l2(WidthVector{4}, 1.0, 1.0, 0.0), 0.0);
    EXPECT_THROW((void)approx_bound_l2(WidthVector{4}, 1.0, 0.0, 1.0), DomainError);
}

TEST(Approximation, SupNormRelu)
{
    EXPECT_NEAR(approx_bound_inf_relu(21, 165, 1, 1), 0.171565, 1e-6);
    EXPECT_EQ(approx_bound_inf_relu(21, 165, 1, 0), 0.0);
    EXPECT_THROW((void)approx_bound_inf_relu(20, 165, 1, 1), DomainError);
    EXPECT_THROW((void)approx_bound_inf_relu(21, 162, 1, 1), DomainError);
}

TEST(Entropy, Examples)
{
    EXPECT_NEAR(metric_entropy_bound(1.0, WidthVector{2}, 2, 1.0), 6.0 * std::log(5.0), 1e-12);
    EXPECT_LT(metric_entropy_bound(1e12, WidthVector{2}, 2, 1.0), 1e-10);
    EXPECT_GT(metric_entropy_bound(1e12, WidthVector{2}, 2, 1.0), 0.0);
    EXPECT_THROW((void)metric_entropy_bound(0.0, WidthVector{2}, 2, 1.0), DomainError);
}

TEST(Rademacher, Examples)
{
    EXPECT_DOUBLE_EQ(rademacher_bound(WidthVector{5}, 1.0, 4, 100, 1.0), 40.0);
    EXPECT_EQ(rademacher_bound(WidthVector{5}, 0.0, 4, 100, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(rademacher_bound(WidthVector{5, 5}, 1.0, 4, 100, 1.0), 80.0);
}

TEST(DeltaN, Examples)
{
    EXPECT_NEAR(delta_n(1000, 2, WidthVector{3, 3}, 1.0), 0.497358, 1e-6);
    const double e2 = std::exp(2.0);
    EXPECT_NEAR(delta_n(e2, 1, WidthVector{1}, 0.5), 2.0 / e2, 1e-15);
    EXPECT_NEAR(delta_n(e2, 1, WidthVector{1}, 0.5), 0.270671, 1e-6);
}

TEST(Lambda, Overparametrized)
{
    BoundConfig c;
    c.n = std::numbers::e;
    c.noise_std = 1.0;
    EXPECT_NEAR(lambda_overparam(c), 6.0 / std::sqrt(std::numbers::e), 1e-12);
    EXPECT_NEAR(lambda_overparam(c), 3.639184, 1e-6);
    c.noise_std = 0.0;
    EXPECT_EQ(lambda_overparam(c), 0.0);
    c.noise_std = 1.0;
    c.d = 100;
    EXPECT_NEAR(lambda_overparam(c), 40.0 / std::sqrt(std::numbers::e), 1e-12);
}

TEST(Lambda, Underparametrized)
{
    BoundConfig c;
    c.n = 1e6;
    c.noise_std = 1.0;
    EXPECT_DOUBLE_EQ(lambda_underparam(c, WidthVector{1}), 1.0);
    EXPECT_NEAR(delta_n(1e6, 1, WidthVector{1}, 1.0), 2.763102e-5, 1e-11);
    c.noise_std = 0.0;
    EXPECT_EQ(lambda_underparam(c, WidthVector{1}), 0.0);
    c.noise_std = 1.0;
    c.n = 1000;
    c.d = 10;
    EXPECT_NEAR(lambda_underparam(c, WidthVector{100}), 13.815511, 1e-6);
    EXPECT_THROW((void)lambda_underparam(c, WidthVector{1, 1}), DomainError);
}

TEST(GenBound, OverAndUnder)
{
    const BoundConfig c = relu_config(0.0);
    const auto over = gen_bound_over(c, WidthVector{4});
    EXPECT_NEAR(over.total, 0.614183, 1e-6);
    EXPECT_DOUBLE_EQ(over.bias_term, 0.25);
    EXPECT_EQ(over.regime, Regime::over);
    const auto under = gen_bound_under(c, WidthVector{4});
    EXPECT_NEAR(under.total, 0.253684, 1e-6);
    EXPECT_EQ(under.regime, Regime::under);

    BoundConfig zero = c;
    zero.target_norm = 0.0;
    EXPECT_EQ(gen_bound_over(zero, WidthVector{4}).total, 0.0);
    EXPECT_EQ(gen_bound_under(zero, WidthVector{4}).total, 0.0);
}

TEST(GenBound, Encompassing)
{
    const BoundConfig c = relu_config(0.1);
    EXPECT_NEAR(gen_bound_encompassing(c, WidthVector{33}).total, 0.061001, 1e-6);
    const auto big = gen_bound_encompassing(c, WidthVector{400});
    EXPECT_NEAR(big.total, 0.370324, 1e-6);
    EXPECT_EQ(big.regime, Regime::over);
    // the total approaches the capped variance from above
    const double cap = 1.01 * over_rate(c);
    double prev = big.total;
    for (std::size_t m : {1000u, 10000u, 100000u}) {
        const double t = gen_bound_encompassing(c, WidthVector{m}).total;
        EXPECT_GT(t, cap);
        EXPECT_LT(t, prev);
        prev = t;
    }
    EXPECT_NEAR(prev, cap, 1e-4);
    // lambda is the larger schedule
    const auto r = gen_bound_encompassing(c, WidthVector{33});
    EXPECT_DOUBLE_EQ(r.lambda_used, std::max(lambda_overparam(c), lambda_underparam(c, WidthVector{33})));
}

TEST(GenBound, EncompassingIsMinOfBranches)
{
    BoundConfig c = relu_config(0.3);
    c.depth = 3;
    for (std::size_t a = 1; a <= 40; a += 3) {
        for (std::size_t b = 1; b <= 40; b += 7) {
            const WidthVector m{a, b};
            const double e = gen_bound_encompassing(c, m).total;
            EXPECT_DOUBLE_EQ(e, std::min(gen_bound_over(c, m).total, gen_bound_under(c, m).total));
        }
    }
}

TEST(GenBound, SimplifiedDominatesAndMatchesOneHiddenLayer)
{
    const BoundConfig c = relu_config(0.1);
    for (std::size_t m = 1; m <= 200; m += 11) {
        EXPECT_NEAR(gen_bound_simplified(c, WidthVector{m}).total, gen_bound_encompassing(c, WidthVector{m}).total,
                    1e-15);
    }
    BoundConfig deep = c;
    deep.depth = 4;
    for (std::size_t m = 1; m <= 20; m += 3) {
        const WidthVector w{m, 2 * m, m + 1};
        EXPECT_GE(gen_bound_simplified(deep, w).total, gen_bound_encompassing(deep, w).total);
    }
}

TEST(GenBound, GeneralLoss)
{
    const BoundConfig c = relu_config(0.1);
    const LossSpec loss = LossSpec::mse().with_constants(1.0, 1.0, 0.0, 1.0);
    const auto r = gen_bound_general_loss(c, loss, WidthVector{4}, 1.0);
    EXPECT_NEAR(r.total, 0.503721, 1e-6);
    EXPECT_DOUBLE_EQ(r.bias_term, 0.5);
    BoundConfig zero = c;
    zero.target_norm = 0.0;
    zero.noise_std = 0.0;
    EXPECT_EQ(gen_bound_general_loss(zero, loss, WidthVector{4}, 3.0).total, 0.0);
    EXPECT_THROW((void)gen_bound_general_loss(c, loss, WidthVector{4}, 0.0), DomainError);
}

TEST(LowerBound, Shape)
{
    EXPECT_NEAR(lower_bound_shape(std::numbers::e), 1.0 / std::sqrt(std::numbers::e), 1e-15);
    EXPECT_NEAR(lower_bound_shape(std::numbers::e), 0.606531, 1e-6);
    EXPECT_EQ(lower_bound_shape(100, 0.0), 0.0);
    EXPECT_THROW((void)lower_bound_shape(1.0), DomainError);
}

TEST(Config, Validation)
{
    BoundConfig c;
    c.n = 1;
    EXPECT_THROW(c.validate(), DomainError);
    c = BoundConfig{};
    c.depth = 1;
    EXPECT_THROW(c.validate(), DomainError);
    c = BoundConfig{};
    c.noise_std = -1.0;
    EXPECT_THROW(c.validate(), DomainError);
    c = BoundConfig{};
    c.envelope_C = 0.0;
    EXPECT_THROW(c.validate(), DomainError);
    EXPECT_THROW((void)gen_bound_over(BoundConfig{}, WidthVector{2, 2}), DomainError);
}

TEST(Sweep, DoubleDescentShape)
{
    const auto s = double_descent_sweep(relu_config(0.1), range(1, 1000), WidthVector{1});
    ASSERT_EQ(s.curve.size(), 1000u);
    ASSERT_EQ(s.local_minima.size(), 1u);
    ASSERT_EQ(s.local_maxima.size(), 1u);
    EXPECT_EQ(s.local_minima[0], 33u);
    EXPECT_EQ(s.local_maxima[0], 396u);
    EXPECT_NEAR(s.curve[32].report.total, 0.061001, 1e-6);
    ASSERT_TRUE(s.saturation_width.has_value());
    EXPECT_EQ(*s.saturation_width, 396u);
    for (std::size_t i = 396; i < s.curve.size(); ++i) {
        EXPECT_LT(s.curve[i].report.total, s.curve[i - 1].report.total);
    }
}

TEST(Sweep, FlatZeroCurve)
{
    BoundConfig c = relu_config(0.0);
    c.target_norm = 0.0;
    const auto s = double_descent_sweep(c, range(1, 100), WidthVector{1});
    for (const auto& p : s.curve) {
        EXPECT_EQ(p.report.total, 0.0);
    }
    EXPECT_TRUE(s.local_minima.empty());
    EXPECT_TRUE(s.local_maxima.empty());
}

TEST(Sweep, NoCapReachedMeansNoInteriorMaximum)
{
    const auto s = double_descent_sweep(relu_config(0.1), range(1, 300), WidthVector{1});
    EXPECT_FALSE(s.saturation_width.has_value());
    EXPECT_TRUE(s.local_maxima.empty());
}

TEST(Sweep, PatternAndValidation)
{
    BoundConfig c = relu_config(0.1);
    c.depth = 3;
    const auto s = double_descent_sweep(c, {1, 2, 4, 8}, WidthVector{1, 2});
    EXPECT_EQ(s.curve[2].widths, (WidthVector{4, 8}));
    EXPECT_THROW((void)double_descent_sweep(c, {}, WidthVector{1, 2}), DomainError);
    EXPECT_THROW((void)double_descent_sweep(c, {2, 2}, WidthVector{1, 2}), DomainError);
    EXPECT_THROW((void)double_descent_sweep(c, {1, 2}, WidthVector{1}), DomainError);
    const std::string csv = sweep_csv(s);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "m,bias,variance,total,regime,lambda");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

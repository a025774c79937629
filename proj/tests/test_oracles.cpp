#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <pesvlab/pesvlab.hpp>

using namespace pesvlab;
using namespace pesvlab::oracles;

namespace {

NetParams gaussian(std::size_t d, const WidthVector& m, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    NetParams p = NetParams::zeros(d, m);
    for (std::size_t l = 0; l < p.layer_count(); ++l) {
        for (double& v : p.layer(l).data()) {
            v = normal(rng);
        }
    }
    return p;
}

Matrix ball_inputs(std::size_t n, std::size_t d, std::uint64_t seed)
{
    Rng rng(seed);
    return sample_inputs(n, d, InputDistribution::uniform_ball, rng);
}

} // namespace

TEST(Lemma1, SmallCasesExact)
{
    const auto a = lemma1_exact(2, 2);
    EXPECT_EQ(a.lhs1, Rational(5, 8));
    EXPECT_EQ(a.lhs2, Rational(5, 8));
    EXPECT_EQ(a.bound, Rational(5, 2));
    EXPECT_TRUE(a.pass);
    const auto b = lemma1_exact(2, 3);
    EXPECT_EQ(b.lhs1, Rational(29, 48));
    EXPECT_TRUE(b.pass);
    EXPECT_THROW((void)lemma1_exact(3, 2), DomainError);
    EXPECT_THROW((void)lemma1_exact(1, 2), DomainError);
}

// The second sum exceeds 5/n from (m, n) = (5, 10) on; the first sum holds throughout.
TEST(Lemma1, SecondSumCounterexample)
{
    const auto r = lemma1_exact(5, 10);
    EXPECT_GT(r.lhs2, r.bound);
    EXPECT_NEAR(static_cast<double>(r.lhs2), 0.514884, 1e-6);
    EXPECT_FALSE(r.pass);
    for (unsigned n = 2; n <= 40; ++n) {
        for (unsigned m = 2; m <= n; ++m) {
            EXPECT_LE(lemma1_exact(m, n).lhs1, Rational(5, n)) << m << "," << n;
        }
    }
}

TEST(Lemma2, SmallCasesExact)
{
    const auto a = lemma2_exact(2, 3);
    EXPECT_EQ(a.lhs, Rational(9, 8));
    EXPECT_TRUE(a.pass);
    const auto b = lemma2_exact(2, 2);
    EXPECT_EQ(b.lhs, Rational(1));
    EXPECT_EQ(b.bound, Rational(5));
    ASSERT_TRUE(b.lhs_enumerated.has_value());
    EXPECT_EQ(*b.lhs_enumerated, 1.0);
}

TEST(Lemma2, PathsAgreeAndPassUpToTwelve)
{
    for (unsigned n = 2; n <= 12; ++n) {
        for (unsigned m = 2; m <= n; ++m) {
            const auto r = lemma2_exact(m, n);
            EXPECT_TRUE(r.pass) << m << "," << n;
            EXPECT_TRUE(r.paths_agree) << m << "," << n << " gap " << r.relative_gap;
        }
    }
    EXPECT_FALSE(lemma2_exact(5, 14).pass);
}

TEST(Maurey, Examples)
{
    const Matrix one{{0.3, -0.4}};
    const auto point = maurey_sampling_check(one, {1.0}, 3, 100, 1);
    EXPECT_LT(point.mean_sq_error, 1e-30);
    EXPECT_TRUE(point.pass);

    const Matrix two{{1.0, 0.0}, {0.0, 1.0}};
    const auto r = maurey_sampling_check(two, {0.5, 0.5}, 1, 10000, 2);
    EXPECT_NEAR(r.mean_sq_error, 0.5, 0.02);
    EXPECT_EQ(r.bound, 1.0);
    EXPECT_TRUE(r.pass);

    // exact expectation is (R^2 - ||f*||^2) / m = 0.5 / m
    for (std::size_t m : {2u, 8u}) {
        const auto s = maurey_sampling_check(two, {0.5, 0.5}, m, 20000, 3 + m);
        EXPECT_NEAR(s.mean_sq_error, 0.5 / static_cast<double>(m), 5.0 * s.standard_error);
    }
    EXPECT_THROW((void)maurey_sampling_check(two, {0.7, 0.7}, 1, 10, 1), DomainError);
    EXPECT_THROW((void)maurey_sampling_check(two, {0.5, 0.5}, 0, 10, 1), DomainError);
}

TEST(Rademacher, ZeroRadiusAndDoubling)
{
    const auto x = ball_inputs(32, 2, 4);
    RademacherOptions o;
    o.trials = 10;
    o.starts = 3;
    o.inner_iters = 20;
    o.seed = 5;
    const auto act = Activation::relu();
    const auto zero = rademacher_mc(WidthVector{4}, 0.0, x, act, o);
    EXPECT_EQ(zero.estimate, 0.0);
    const auto one = rademacher_mc(WidthVector{4}, 1.0, x, act, o);
    const auto two = rademacher_mc(WidthVector{4}, 2.0, x, act, o);
    EXPECT_GT(one.estimate, 0.0);
    EXPECT_NEAR(two.estimate, 2.0 * one.estimate, 1e-9 * one.estimate);
    EXPECT_LE(one.estimate, one.bound);
    EXPECT_DOUBLE_EQ(one.bound, theory::rademacher_bound(WidthVector{4}, 1.0, 2, 32, 1.0));
    EXPECT_DOUBLE_EQ(one.c_hat, one.estimate / one.bound);

    Matrix outside = x;
    outside(0, 0) = 2.0;
    EXPECT_THROW((void)rademacher_mc(WidthVector{4}, 1.0, outside, act, o), DomainError);
}

TEST(Covering, GridAndPacking)
{
    const Matrix g = ball_grid(2, 0.5);
    for (std::size_t i = 0; i < g.rows(); ++i) {
        EXPECT_LE(g(i, 0) * g(i, 0) + g(i, 1) * g(i, 1), 1.0 + 1e-12);
        EXPECT_EQ(g(i, 2), 1.0);
    }
    const auto act = Activation::relu();
    // |f| <= sqrt(2) on the ball, so every pair is within 2 sqrt(2)
    const auto coarse = covering_packing_lower_bound(WidthVector{2}, 3.0, 1, act, 200, 1);
    EXPECT_EQ(coarse.packing, 1u);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto r = covering_packing_lower_bound(WidthVector{1}, 0.25, 1, act, 500, seed);
        EXPECT_NEAR(r.entropy_bound, 2.0 * std::log(33.0), 1e-12);
        EXPECT_LE(r.log_packing, r.entropy_bound);
        EXPECT_TRUE(r.pass);
        EXPECT_GT(r.packing, 1u);
    }
    EXPECT_THROW((void)covering_packing_lower_bound(WidthVector{1}, 0.0, 1, act, 10, 1), DomainError);
}

TEST(Pointwise, Examples)
{
    const NetParams linear(2, {Matrix{{0.6, 0.8, 0.0}}, Matrix{{1.0}}});
    const auto r = pointwise_norm_check(linear, Activation::identity(), 500, 1);
    EXPECT_LE(r.max_ratio, 1.0);
    EXPECT_GT(r.max_ratio, 0.9);
    EXPECT_TRUE(r.pass);
    EXPECT_THROW((void)pointwise_norm_check(linear, Activation::relu().shifted(1.0), 10, 1), DomainError);

    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const NetParams p = random_net(rng);
        const auto act = i % 2 ? Activation::relu() : Activation::leaky_relu(0.1);
        EXPECT_TRUE(pointwise_norm_check(p, act, 100, i).pass);
    }
}

TEST(Cones, HandExamples)
{
    const Matrix x{{1.0, 0.0, 1.0}};
    const NetParams same(2, {Matrix{{1.0, 0.0, 0.0}, {2.0, 0.0, 0.0}}, Matrix{{1.0, 3.0}}});
    const auto g = sign_pattern_groups(same, Activation::relu(), x);
    EXPECT_EQ(g.labels[0][0], g.labels[0][1]);
    EXPECT_EQ(g.group_count[0], 1u);

    const Matrix y{{1.0, 1.0}};
    const NetParams opposite(1, {Matrix{{1.0, 0.0}, {-1.0, 0.0}}, Matrix{{1.0, 1.0}}});
    const auto h = sign_pattern_groups(opposite, Activation::relu(), y);
    EXPECT_NE(h.labels[0][0], h.labels[0][1]);

    const NetParams signs(2, {Matrix{{1.0, 0.0, 0.0}, {2.0, 0.0, 0.0}}, Matrix{{1.0, -3.0}}});
    EXPECT_EQ(sign_pattern_groups(signs, Activation::relu(), x).group_count[0], 2u);
    EXPECT_THROW((void)sign_pattern_groups(same, Activation::leaky_relu(0.1), x), UnsupportedError);
}

TEST(Cones, MatchBruteForceAndRescaling)
{
    const auto x = ball_inputs(12, 2, 8);
    const auto act = Activation::relu();
    for (std::uint64_t s = 0; s < 30; ++s) {
        const NetParams p = gaussian(2, WidthVector{6, 5}, s);
        const auto g = sign_pattern_groups(p, act, x);
        const auto trace = pesvlab::detail::forward_trace(p, act, x);
        for (std::size_t l = 0; l + 1 < p.layer_count(); ++l) {
            const Matrix& z = trace.pre[l];
            const Matrix& next = p.layer(l + 1);
            for (std::size_t a = 0; a < z.cols(); ++a) {
                for (std::size_t b = 0; b < z.cols(); ++b) {
                    bool same = true;
                    for (std::size_t i = 0; i < z.rows(); ++i) {
                        same = same && ((z(i, a) > 0.0) == (z(i, b) > 0.0));
                    }
                    for (std::size_t r = 0; r < next.rows(); ++r) {
                        same = same && (std::signbit(next(r, a)) == std::signbit(next(r, b)));
                    }
                    EXPECT_EQ(same, g.labels[l][a] == g.labels[l][b]);
                }
            }
        }
        const NetParams q = rescale_neuron(rescale_neuron(p, 1, s % 6, 3.0), 2, s % 5, 0.25);
        EXPECT_EQ(sign_pattern_groups(q, act, x).labels, g.labels);
    }
}

TEST(Collinearity, Constructed)
{
    const Matrix x{{1.0, 1.0, 1.0}};
    const auto act = Activation::relu();
    const NetParams dup(2, {Matrix{{0.3, 0.2, 0.1}, {0.3, 0.2, 0.1}}, Matrix{{1.0, 2.0}}});
    const auto a = collinearity_report(dup, act, x);
    EXPECT_EQ(a.global_min_abs_cosine, 1.0);

    const NetParams ortho(2, {Matrix{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}, Matrix{{1.0, 1.0}}});
    const auto b = collinearity_report(ortho, act, x);
    ASSERT_EQ(b.groups.size(), 1u);
    EXPECT_EQ(b.groups[0].members.size(), 2u);
    EXPECT_EQ(b.global_min_abs_cosine, 0.0);

    const NetParams single(2, {Matrix{{1.0, 0.0, 0.0}}, Matrix{{1.0}}});
    EXPECT_EQ(collinearity_report(single, act, x).global_min_abs_cosine, 1.0);
}

TEST(Collinearity, Exclusions)
{
    const Matrix x{{1.0, 1.0, 1.0}, {0.5, -0.5, 1.0}};
    const auto act = Activation::relu();
    // neuron 1 sits on a kink at the second input; neuron 2 has no outgoing weight
    const NetParams p(2, {Matrix{{1.0, 0.0, 0.0}, {1.0, 1.0, 0.0}, {0.0, 1.0, 0.0}}, Matrix{{1.0, 1.0, 0.0}}});
    const auto r = collinearity_report(p, act, x);
    EXPECT_EQ(r.boundary, (std::vector<std::size_t>{1}));
    EXPECT_EQ(r.vanishing, (std::vector<std::size_t>{2}));
    EXPECT_EQ(r.global_min_abs_cosine, 1.0);
}

TEST(Equivalence, NoRegularizationMeansNoGap)
{
    const auto teacher = scaled_relu_teacher(2, WidthVector{3}, 1.0, 5);
    const auto ds = sample_dataset(teacher, 16, 0.1, InputDistribution::uniform_ball, 6);
    EquivalenceOptions o;
    o.train.max_iters = 300;
    const auto r = equivalence_check_relu(ds, 0.0, WidthVector{6}, {1, 2}, o);
    ASSERT_EQ(r.rows.size(), 2u);
    for (const auto& row : r.rows) {
        EXPECT_NEAR(row.wd_objective, row.pesv_objective, 1e-12);
        EXPECT_NEAR(row.mixed_objective, row.pesv_objective, 1e-12);
        EXPECT_LT(row.gap_wd, 1e-9);
        EXPECT_LT(row.gap_mixed, 1e-9);
    }
    EXPECT_TRUE(r.pass);
}

TEST(Equivalence, ZeroTargetsGiveNearZeroObjectives)
{
    const TeacherSpec zero(Model{NetParams::zeros(2, WidthVector{3}), Activation::relu()});
    const auto ds = sample_dataset(zero, 16, 0.0, InputDistribution::uniform_ball, 6);
    EquivalenceOptions o;
    o.train.max_iters = 2000;
    const auto r = equivalence_check_relu(ds, 0.05, WidthVector{4}, {3}, o);
    EXPECT_LT(r.rows[0].pesv_objective, 5e-2);
    EXPECT_LT(r.rows[0].wd_objective, 5e-2);
    EXPECT_LT(r.rows[0].mixed_objective, 5e-2);
}

TEST(Equivalence, Helpers)
{
    EXPECT_EQ(oracles::detail::median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_EQ(oracles::detail::median({4.0, 1.0, 2.0, 3.0}), 2.5);
    EXPECT_NEAR(oracles::detail::relative_gap(1.1, 1.0), 0.1, 1e-15);
}

TEST(Report, Json)
{
    OracleReport r;
    r.name = "x";
    r.pass = true;
    const auto j = to_json(r);
    EXPECT_EQ(j["name"], "x");
    EXPECT_EQ(j["pass"], true);
    EXPECT_TRUE(j.contains("inputs"));
    EXPECT_TRUE(j.contains("outputs"));
    EXPECT_TRUE(j.contains("tolerances"));
}

TEST(Suites, SmallConfigurationsRun)
{
    SuiteOptions o;
    o.lemma1_max_n = 8;
    o.lemma2_max_n = 8;
    o.maurey_trials = 2000;
    o.rademacher_trials = 5;
    o.rademacher_starts = 2;
    o.rademacher_iters = 10;
    o.packing_samples = 200;
    o.packing_seeds = 2;
    o.pointwise_nets = 20;
    o.pointwise_probes = 20;
    EXPECT_TRUE(run_suite("lemmas", o).pass);  // the second-sum failures start at n = 10
    EXPECT_TRUE(run_suite("maurey", o).pass);
    EXPECT_TRUE(run_suite("rademacher", o).pass);
    EXPECT_TRUE(run_suite("entropy", o).pass);
    EXPECT_TRUE(run_suite("pointwise", o).pass);
    EXPECT_THROW((void)run_suite("lemma", o), DomainError);
    o.lemma1_max_n = 10;
    const auto lemmas = run_suite("lemmas", o);
    EXPECT_FALSE(lemmas.pass);
    EXPECT_EQ(lemmas.outputs["lemma1_first_counterexample"]["m"], 5);
    EXPECT_EQ(lemmas.outputs["lemma1_first_sum_failed"], 0);
}

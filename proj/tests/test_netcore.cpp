#include <bit>
#include <cmath>
#include <cstdint>
#include <random>

#include <gtest/gtest.h>

#include <pesvlab/network.hpp>
#include <pesvlab/norms.hpp>
#include <pesvlab/serialization.hpp>
#include <pesvlab/transforms.hpp>
#include <pesvlab/width_vector.hpp>

using namespace pesvlab;

namespace {

NetParams random_params(std::size_t d, const WidthVector& m, std::mt19937_64& rng, double scale = 1.0)
{
    std::normal_distribution<double> normal(0.0, scale);
    NetParams p = NetParams::zeros(d, m);
    for (std::size_t l = 0; l < p.layer_count(); ++l) {
        for (double& v : p.layer(l).data()) {
            v = normal(rng);
        }
    }
    return p;
}

Matrix random_inputs(std::size_t n, std::size_t d, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix x(n, d + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            x(i, j) = u(rng) / std::sqrt(static_cast<double>(d));
        }
        x(i, d) = 1.0;
    }
    return x;
}

} // namespace

TEST(WidthVector, Derived)
{
    const WidthVector m{3, 1, 2};
    EXPECT_EQ(m.depth(), 4u);
    EXPECT_EQ(m.width(), 3u);
    EXPECT_EQ(m.bottleneck(), 1u);
    EXPECT_DOUBLE_EQ(m.product(), 6.0);
    EXPECT_EQ(m.scaled(2), (WidthVector{6, 2, 4}));
    EXPECT_THROW(WidthVector(std::vector<std::size_t>{}), DomainError);
    EXPECT_THROW((WidthVector{2, 0}), DomainError);
}

TEST(WidthVector, MaxNondecreasingComponent)
{
    EXPECT_EQ(max_nondecreasing_component(WidthVector{2, 2, 2}), (WidthVector{2, 2, 2}));
    EXPECT_EQ(max_nondecreasing_component(WidthVector{3, 1, 2}), (WidthVector{1, 1, 2}));
    EXPECT_EQ(max_nondecreasing_component(WidthVector{5, 3, 7, 2, 9}), (WidthVector{2, 2, 2, 2, 9}));
}

// Brute force over every nondecreasing minorant for short lists with small entries.
TEST(WidthVector, MaxNondecreasingComponentIsMaximal)
{
    for (std::size_t len = 1; len <= 4; ++len) {
        std::vector<std::size_t> m(len, 1);
        while (true) {
            const auto got = max_nondecreasing_component(WidthVector(m)).widths();
            for (std::size_t i = 0; i < len; ++i) {
                ASSERT_LE(got[i], m[i]);
                if (i > 0) {
                    ASSERT_LE(got[i - 1], got[i]);
                }
            }
            // every nondecreasing minorant is dominated elementwise
            std::vector<std::size_t> c(len, 1);
            while (true) {
                bool minorant = true;
                for (std::size_t i = 0; i < len; ++i) {
                    minorant = minorant && c[i] <= m[i] && (i == 0 || c[i - 1] <= c[i]);
                }
                if (minorant) {
                    for (std::size_t i = 0; i < len; ++i) {
                        ASSERT_LE(c[i], got[i]);
                    }
                }
                std::size_t j = 0;
                while (j < len && ++c[j] > 5) {
                    c[j++] = 1;
                }
                if (j == len) {
                    break;
                }
            }
            std::size_t j = 0;
            while (j < len && ++m[j] > 5) {
                m[j++] = 1;
            }
            if (j == len) {
                break;
            }
        }
    }
}

TEST(Activation, Basics)
{
    const auto relu = Activation::relu();
    EXPECT_EQ(relu(0.0), 0.0);
    EXPECT_EQ(relu(-2.0), 0.0);
    EXPECT_EQ(relu(2.5), 2.5);
    EXPECT_EQ(relu.derivative(0.0), 0.0);
    EXPECT_EQ(relu.lipschitz(), 1.0);
    EXPECT_TRUE(relu.normalized());

    const auto leaky = Activation::leaky_relu(0.1);
    EXPECT_DOUBLE_EQ(leaky(-2.0), -0.2);
    EXPECT_EQ(leaky.lipschitz(), 1.0);

    const auto shifted = relu.shifted(0.5);
    EXPECT_EQ(shifted(0.0), 0.5);
    EXPECT_EQ(shifted.at_zero(), 0.5);
    EXPECT_FALSE(shifted.normalized());
    EXPECT_FALSE(shifted.positively_homogeneous());
}

TEST(Activation, TabulatedLipschitzHoldsOnSamples)
{
    const auto t = Activation::tabulated({-2.0, -1.0, 0.0, 1.0, 3.0}, {1.0, 0.0, 0.5, 2.5, 3.0});
    EXPECT_DOUBLE_EQ(t.lipschitz(), 2.0);
    EXPECT_DOUBLE_EQ(t(0.5), 1.5);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int i = 0; i < 2000; ++i) {
        const double x = u(rng), y = u(rng);
        EXPECT_LE(std::abs(t(x) - t(y)), t.lipschitz() * std::abs(x - y) + 1e-12);
    }
    const auto nd = Activation::tabulated({0.0, 1.0}, {0.0, 1.0}, false);
    EXPECT_THROW((void)nd.derivative(0.5), UnsupportedError);
}

TEST(NetParams, ShapeValidation)
{
    EXPECT_THROW(NetParams(2, {Matrix(3, 2), Matrix(1, 3)}), ShapeError);
    EXPECT_THROW(NetParams(2, {Matrix(3, 3), Matrix(1, 2)}), ShapeError);
    EXPECT_THROW(NetParams(2, {Matrix(3, 3), Matrix(2, 3)}), ShapeError);
    Matrix bad(1, 2);
    bad(0, 0) = std::nan("");
    EXPECT_THROW(NetParams(1, {bad, Matrix(1, 1, 1.0)}), DomainError);
}

TEST(Forward, HandExamples)
{
    const NetParams p(1, {Matrix{{1.0, 0.0}}, Matrix{{1.0}}});
    const auto relu = Activation::relu();
    EXPECT_EQ(forward(p, relu, Matrix{{3.0, 1.0}})[0], 3.0);
    EXPECT_EQ(forward(p, relu, Matrix{{-3.0, 1.0}})[0], 0.0);

    const NetParams deep(1, {Matrix{{1.0, 1.0}}, Matrix{{-1.0}}, Matrix{{2.0}}});
    EXPECT_EQ(forward(deep, Activation::identity(), Matrix{{0.5, 1.0}})[0], -3.0);
    EXPECT_EQ(forward(deep, relu, Matrix{{0.5, 1.0}})[0], 0.0);

    EXPECT_THROW((void)forward(p, relu, Matrix{{1.0, 2.0, 3.0}}), ShapeError);
}

TEST(Forward, OutputLayerHomogeneity)
{
    std::mt19937_64 rng(5);
    const auto x = random_inputs(20, 3, rng);
    for (const auto& act : {Activation::relu(), Activation::leaky_relu(0.2), Activation::relu().shifted(0.3)}) {
        NetParams p = random_params(3, WidthVector{4, 3}, rng);
        const auto before = forward(p, act, x);
        for (double& v : p.output().data()) {
            v *= 2.5;
        }
        const auto after = forward(p, act, x);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            EXPECT_NEAR(after[i], 2.5 * before[i], 1e-12 * (1.0 + std::abs(before[i])));
        }
    }
}

TEST(Forward, ReluRescalingInvariance)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> c(0.1, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        const NetParams p = random_params(2, WidthVector{5, 4}, rng);
        const auto x = random_inputs(30, 2, rng);
        const auto before = forward(p, Activation::relu(), x);
        NetParams q = rescale_neuron(p, 1, trial % 5, c(rng));
        q = rescale_neuron(q, 2, trial % 4, c(rng));
        const auto after = forward(q, Activation::relu(), x);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            EXPECT_NEAR(after[i], before[i], 1e-10 * (1.0 + std::abs(before[i])));
        }
    }
}

TEST(Backprop, LinearModel)
{
    const NetParams p(1, {Matrix{{1.0, 0.0}}, Matrix{{1.0}}});
    const std::vector<double> up{1.0};
    const auto g = backprop(p, Activation::identity(), Matrix{{3.0, 1.0}}, up);
    EXPECT_EQ(g.output()(0, 0), 3.0);
    EXPECT_EQ(g.layer(0)(0, 0), 3.0);
    EXPECT_EQ(g.layer(0)(0, 1), 1.0);
}

TEST(Backprop, ZeroWeightsGiveZeroGradient)
{
    const NetParams p = NetParams::zeros(2, WidthVector{3, 2});
    const std::vector<double> up{1.0, -2.0};
    const auto g = backprop(p, Activation::relu(), Matrix{{0.3, 0.1, 1.0}, {-0.5, 0.2, 1.0}}, up);
    EXPECT_EQ(g.frobenius_norm(), 0.0);
}

TEST(Backprop, MatchesCentralDifferences)
{
    std::mt19937_64 rng(21);
    for (const auto& act : {Activation::relu(), Activation::leaky_relu(0.1), Activation::identity()}) {
        const NetParams p = random_params(3, WidthVector{4, 3}, rng);
        const auto x = random_inputs(6, 3, rng);
        std::vector<double> up{0.3, -1.0, 0.5, 2.0, -0.7, 1.1};
        auto loss = [&](const NetParams& q) {
            const auto f = forward(q, act, x);
            double s = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) {
                s += up[i] * f[i];
            }
            return s;
        };
        const auto trace = pesvlab::detail::forward_trace(p, act, x);
        double min_gap = 1e300;
        for (std::size_t l = 0; l + 1 < trace.pre.size(); ++l) {
            for (double v : trace.pre[l].data()) {
                min_gap = std::min(min_gap, std::abs(v));
            }
        }
        if (min_gap < 1e-3) {
            continue;  // too close to a kink for the step used below
        }
        const auto g = backprop(p, act, x, up);
        const double h = 1e-4;
        for (std::size_t l = 0; l < p.layer_count(); ++l) {
            for (std::size_t k = 0; k < p.layer(l).data().size(); ++k) {
                NetParams plus = p, minus = p;
                plus.layer(l).data()[k] += h;
                minus.layer(l).data()[k] -= h;
                const double fd = (loss(plus) - loss(minus)) / (2.0 * h);
                const double an = g.layer(l).data()[k];
                EXPECT_LE(std::abs(fd - an), 1e-5 * std::max(1.0, std::abs(an)));
            }
        }
    }
}

TEST(AbsorbBias, SingleReluUnit)
{
    StandardNetwork net{1, {Matrix{{1.0}}, Matrix{{1.0}}}, {{1.0}, {0.0}}};
    const auto relu = Activation::relu();
    const NetParams p = absorb_bias(net, relu);
    EXPECT_EQ(p.layer(0)(0, 0), 1.0);
    EXPECT_EQ(p.layer(0)(0, 1), 1.0);
    for (double x : {-2.0, -1.0, -0.3, 0.0, 0.4, 1.0}) {
        EXPECT_EQ(forward(p, relu, Matrix{{x, 1.0}})[0], std::max(0.0, x + 1.0));
    }
}

TEST(AbsorbBias, RandomDeepNetsAgree)
{
    std::mt19937_64 rng(33);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (const auto& act : {Activation::relu(), Activation::leaky_relu(0.1), Activation::relu().shifted(0.7)}) {
        StandardNetwork net;
        net.input_dim = 3;
        const std::vector<std::size_t> dims{3, 5, 4, 1};
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            Matrix w(dims[l + 1], dims[l]);
            for (double& v : w.data()) {
                v = normal(rng);
            }
            std::vector<double> b(dims[l + 1]);
            for (double& v : b) {
                v = normal(rng);
            }
            net.weights.push_back(w);
            net.biases.push_back(b);
        }
        const NetParams p = absorb_bias(net, act);
        EXPECT_EQ(p.widths(), (WidthVector{6, 5}));
        const auto x = random_inputs(1000, 3, rng);
        const auto f = forward(p, act, x);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const std::vector<double> raw(x.row(i).begin(), x.row(i).begin() + 3);
            EXPECT_NEAR(f[i], net(act, raw), 1e-12);
        }
    }
}

TEST(NormalizeActivation, NoOpWhenNormalized)
{
    std::mt19937_64 rng(2);
    const NetParams p = random_params(2, WidthVector{3}, rng);
    const auto [q, act] = normalize_activation(p, Activation::relu());
    EXPECT_EQ(q, p);
    EXPECT_EQ(act.kind(), ActivationKind::relu);
}

TEST(NormalizeActivation, ShiftedActivationsAgree)
{
    const NetParams single(1, {Matrix{{1.0, 0.0}}, Matrix{{1.0}}});
    const auto [s, sact] = normalize_activation(single, Activation::relu().shifted(0.5));
    EXPECT_TRUE(sact.normalized());
    EXPECT_NEAR(forward(s, sact, Matrix{{0.0, 1.0}})[0], 0.5, 1e-15);

    std::mt19937_64 rng(4);
    for (const auto& act : {Activation::identity().shifted(1.0), Activation::relu().shifted(-0.4),
                            Activation::leaky_relu(0.3).shifted(2.0)}) {
        const NetParams p = random_params(2, WidthVector{4, 3}, rng);
        const auto [q, qa] = normalize_activation(p, act);
        EXPECT_EQ(qa.at_zero(), 0.0);
        EXPECT_EQ(q.widths(), (WidthVector{5, 4}));
        EXPECT_EQ(q.input_dim(), p.input_dim());
        const auto x = random_inputs(1000, 2, rng);
        const auto a = forward(p, act, x);
        const auto b = forward(q, qa, x);
        for (std::size_t i = 0; i < x.rows(); ++i) {
            EXPECT_NEAR(a[i], b[i], 1e-12);
        }
    }
}

TEST(Serialization, RoundTripIsBitExact)
{
    std::mt19937_64 rng(77);
    NetParams p = random_params(3, WidthVector{4, 2}, rng, 1e3);
    p.layer(1)(0, 0) = 5e-324;
    p.layer(0)(1, 2) = -0.0;
    for (const auto& act : {Activation::relu(), Activation::leaky_relu(0.1), Activation::relu().shifted(0.25),
                            Activation::tabulated({-1.0, 0.0, 2.0}, {0.1, 0.0, 1.0 / 3.0})}) {
        const Model m{p, act};
        const Model back = deserialize_model(serialize_model(m));
        ASSERT_EQ(back.params.layer_count(), p.layer_count());
        for (std::size_t l = 0; l < p.layer_count(); ++l) {
            const auto& a = p.layer(l).data();
            const auto& b = back.params.layer(l).data();
            ASSERT_EQ(a.size(), b.size());
            for (std::size_t k = 0; k < a.size(); ++k) {
                EXPECT_EQ(std::bit_cast<std::uint64_t>(a[k]), std::bit_cast<std::uint64_t>(b[k]));
            }
        }
        EXPECT_EQ(back.activation.name(), act.name());
        EXPECT_EQ(serialize_model(back), serialize_model(m));
    }
}

TEST(Serialization, Fields)
{
    const Model m{NetParams(1, {Matrix{{1.0, 2.0}}, Matrix{{3.0}}}), Activation::relu()};
    const auto j = model_to_json(m);
    EXPECT_EQ(j["depth"], 2);
    EXPECT_EQ(j["input_dim"], 1);
    EXPECT_EQ(j["widths"], nlohmann::json::array({1}));
    EXPECT_EQ(j["activation"]["kind"], "relu");
    EXPECT_EQ(j["activation"]["L_sigma"], 1.0);
    EXPECT_EQ(j["activation"]["sigma0"], 0.0);
    EXPECT_EQ(j["layers"][0], nlohmann::json::array({1.0, 2.0}));
    EXPECT_THROW((void)deserialize_model("{"), FormatError);
    EXPECT_THROW((void)deserialize_model(R"({"depth": 2})"), FormatError);
}

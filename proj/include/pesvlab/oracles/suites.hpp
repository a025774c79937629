#ifndef PESVLAB_ORACLES_SUITES_HPP
#define PESVLAB_ORACLES_SUITES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "../activation.hpp"
#include "../data.hpp"
#include "../network.hpp"
#include "../norms.hpp"
#include "../train.hpp"
#include "combinatorics.hpp"
#include "cones.hpp"
#include "covering.hpp"
#include "equivalence.hpp"
#include "maurey.hpp"
#include "pointwise.hpp"
#include "rademacher.hpp"
#include "report.hpp"

namespace pesvlab::oracles {

/// Knobs of every verification suite. Defaults are the documented configurations.
struct SuiteOptions {
    std::uint64_t seed{0};

    unsigned lemma1_max_n{40};
    unsigned lemma2_max_n{12};

    std::size_t maurey_trials{10000};

    std::size_t rademacher_trials{200};
    std::size_t rademacher_starts{16};
    std::size_t rademacher_iters{100};

    std::size_t packing_samples{3000};
    std::size_t packing_seeds{20};

    std::size_t pointwise_nets{1000};
    std::size_t pointwise_probes{100};

    std::size_t collinearity_iters{200000};
    std::size_t collinearity_seeds{5};

    std::size_t equivalence_iters{50000};
    std::size_t equivalence_seeds{5};
};

inline const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names{"lemmas",       "maurey",      "rademacher", "entropy",
                                                "pointwise",    "collinearity", "equivalence"};
    return names;
}

/// Random relu teacher on R^d with hidden widths m, its output row scaled to nu = norm.
[[nodiscard]] inline TeacherSpec scaled_relu_teacher(std::size_t d, const WidthVector& widths, double norm,
                                                     std::uint64_t seed)
{
    NetParams p = init_uniform(d, widths, seed);
    const double nu = pesv_norm(p);
    for (double& v : p.output().data()) {
        v *= norm / nu;
    }
    return TeacherSpec(Model{std::move(p), Activation::relu()});
}

[[nodiscard]] inline OracleReport run_lemmas(const SuiteOptions& o)
{
    OracleReport r;
    r.name = "lemmas";
    r.inputs = {{"lemma1_range", {2, o.lemma1_max_n}}, {"lemma2_range", {2, o.lemma2_max_n}}};
    r.tolerances = {{"path_agreement", 1e-12}};
    std::size_t checked1 = 0, failed_first = 0, failed_second = 0, checked2 = 0, failed2 = 0;
    double worst_first = 0.0, worst_second = 0.0, worst2 = 0.0, max_gap = 0.0;
    nlohmann::json first_counterexample = nullptr;
    for (unsigned n = 2; n <= o.lemma1_max_n; ++n) {
        for (unsigned m = 2; m <= n; ++m) {
            const auto l1 = lemma1_exact(m, n);
            ++checked1;
            failed_first += l1.lhs1 <= l1.bound ? 0 : 1;
            failed_second += l1.lhs2 <= l1.bound ? 0 : 1;
            if (!l1.pass && first_counterexample.is_null()) {
                first_counterexample = {{"m", m}, {"n", n}, {"lhs1", static_cast<double>(l1.lhs1)},
                                        {"lhs2", static_cast<double>(l1.lhs2)}, {"bound", static_cast<double>(l1.bound)}};
            }
            worst_first = std::max(worst_first, static_cast<double>(l1.lhs1 / l1.bound));
            worst_second = std::max(worst_second, static_cast<double>(l1.lhs2 / l1.bound));
        }
    }
    for (unsigned n = 2; n <= o.lemma2_max_n; ++n) {
        for (unsigned m = 2; m <= n; ++m) {
            const auto l2 = lemma2_exact(m, n);
            ++checked2;
            failed2 += l2.pass && l2.paths_agree ? 0 : 1;
            worst2 = std::max(worst2, static_cast<double>(l2.lhs / l2.bound));
            max_gap = std::max(max_gap, l2.relative_gap);
        }
    }
    r.outputs = {{"lemma1_checked", checked1},
                 {"lemma1_first_sum_failed", failed_first},
                 {"lemma1_second_sum_failed", failed_second},
                 {"lemma1_first_sum_max_ratio", worst_first},
                 {"lemma1_second_sum_max_ratio", worst_second},
                 {"lemma1_first_counterexample", first_counterexample},
                 {"lemma2_checked", checked2},
                 {"lemma2_failed", failed2},
                 {"lemma2_max_ratio", worst2},
                 {"lemma2_max_path_gap", max_gap}};
    r.pass = failed_first == 0 && failed_second == 0 && failed2 == 0;
    return r;
}

[[nodiscard]] inline OracleReport run_maurey(const SuiteOptions& o)
{
    OracleReport r;
    r.name = "maurey";
    r.inputs = {{"trials", o.maurey_trials}, {"seed", o.seed}};
    r.tolerances = {{"two_atom_mean", 0.02}, {"random_factor", 1.1}};
    const Matrix two{{1.0, 0.0}, {0.0, 1.0}};
    const auto ortho = maurey_sampling_check(two, {0.5, 0.5}, 1, o.maurey_trials, o.seed);
    bool pass = std::abs(ortho.mean_sq_error - 0.5) <= 0.02;

    Rng rng(o.seed + 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix atoms(10, 5);
    for (double& v : atoms.data()) {
        v = normal(rng);
    }
    std::vector<double> w(10);
    double total = 0.0;
    for (double& v : w) {
        v = unit(rng);
        total += v;
    }
    for (double& v : w) {
        v /= total;
    }
    nlohmann::json scaling = nlohmann::json::array();
    for (std::size_t m : {1u, 4u, 16u}) {
        const auto res = maurey_sampling_check(atoms, w, m, o.maurey_trials, o.seed + 2 + m);
        const bool ok = res.mean_sq_error <= res.bound * 1.1;
        pass = pass && ok;
        scaling.push_back({{"m", m}, {"mean", res.mean_sq_error}, {"bound", res.bound}, {"pass", ok}});
    }
    r.outputs = {{"two_atom_mean", ortho.mean_sq_error}, {"two_atom_se", ortho.standard_error}, {"random", scaling}};
    r.pass = pass;
    return r;
}

[[nodiscard]] inline OracleReport run_rademacher(const SuiteOptions& o)
{
    OracleReport r;
    r.name = "rademacher";
    const WidthVector widths({8});
    const std::size_t d = 2, n = 64;
    r.inputs = {{"widths", widths.widths()}, {"F", 1.0}, {"d", d}, {"n", n}, {"trials", o.rademacher_trials},
                {"starts", o.rademacher_starts}, {"inner_iters", o.rademacher_iters}, {"seed", o.seed}};
    r.tolerances = {{"doubling_relative", 1e-9}};
    Rng rng(o.seed);
    const Matrix x = sample_inputs(n, d, InputDistribution::uniform_ball, rng);
    RademacherOptions ro;
    ro.trials = o.rademacher_trials;
    ro.starts = o.rademacher_starts;
    ro.inner_iters = o.rademacher_iters;
    ro.seed = o.seed;
    const auto act = Activation::relu();
    const auto one = rademacher_mc(widths, 1.0, x, act, ro);
    const auto two = rademacher_mc(widths, 2.0, x, act, ro);
    const double doubling = std::abs(two.estimate - 2.0 * one.estimate) / std::max(one.estimate, 1e-300);
    r.outputs = {{"estimate", one.estimate}, {"standard_error", one.standard_error}, {"bound", one.bound},
                 {"c_hat", one.c_hat}, {"estimate_2F", two.estimate}, {"doubling_gap", doubling}};
    r.pass = one.estimate <= one.bound && doubling <= 1e-9;
    return r;
}

[[nodiscard]] inline OracleReport run_entropy(const SuiteOptions& o)
{
    OracleReport r;
    r.name = "entropy";
    r.inputs = {{"widths", {{1}, {2}}}, {"d", 1}, {"delta", {0.5, 0.25}}, {"seeds", o.packing_seeds},
                {"samples", o.packing_samples}};
    const auto act = Activation::relu();
    nlohmann::json rows = nlohmann::json::array();
    bool pass = true;
    for (std::size_t w : {1u, 2u}) {
        for (double delta : {0.5, 0.25}) {
            std::size_t max_p = 0;
            double bound = 0.0;
            bool ok = true;
            for (std::size_t s = 0; s < o.packing_seeds; ++s) {
                const auto res = covering_packing_lower_bound(WidthVector({w}), delta, 1, act, o.packing_samples,
                                                              o.seed + s);
                max_p = std::max(max_p, res.packing);
                bound = res.entropy_bound;
                ok = ok && res.pass;
            }
            pass = pass && ok;
            rows.push_back({{"m", w}, {"delta", delta}, {"max_packing", max_p}, {"log_bound", bound}, {"pass", ok}});
        }
    }
    r.outputs = {{"cases", rows}};
    r.pass = pass;
    return r;
}

/// Random net with L in {2,3,4}, d in 1..4 and widths in 1..8, standard normal weights.
[[nodiscard]] inline NetParams random_net(Rng& rng)
{
    std::uniform_int_distribution<std::size_t> depth(2, 4), dim(1, 4), width(1, 8);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t L = depth(rng);
    const std::size_t d = dim(rng);
    std::vector<std::size_t> m(L - 1);
    for (auto& v : m) {
        v = width(rng);
    }
    NetParams p = NetParams::zeros(d, WidthVector(m));
    for (std::size_t l = 0; l < p.layer_count(); ++l) {
        for (double& v : p.layer(l).data()) {
            v = normal(rng);
        }
    }
    return p;
}

[[nodiscard]] inline OracleReport run_pointwise(const SuiteOptions& o)
{
    OracleReport r;
    r.name = "pointwise";
    r.inputs = {{"nets", o.pointwise_nets}, {"probes", o.pointwise_probes}, {"seed", o.seed},
                {"activations", {"relu", "leaky_relu(0.1)"}}};
    r.tolerances = {{"slack", 1e-9}};
    Rng rng(o.seed);
    double worst = 0.0;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < o.pointwise_nets; ++i) {
        const NetParams p = random_net(rng);
        const Activation act = i % 2 == 0 ? Activation::relu() : Activation::leaky_relu(0.1);
        const auto res = pointwise_norm_check(p, act, o.pointwise_probes, o.seed + i);
        worst = std::max(worst, res.max_ratio);
        failed += res.pass ? 0 : 1;
    }
    r.outputs = {{"max_ratio", worst}, {"failed_nets", failed}};
    r.pass = failed == 0;
    return r;
}

/// Documented collinearity run: relu, d = 2, n = 16, widths (8), lambda = 0.05, teacher with
/// widths (3) and nu = 3, noise 0.1, step 0.1 / sqrt(1 + t / 1000).
[[nodiscard]] inline OracleReport run_collinearity(const SuiteOptions& o)
{
    OracleReport r;
    r.name = "collinearity";
    r.soft = true;
    const double lambda = 0.05;
    r.inputs = {{"d", 2}, {"n", 16}, {"widths", {8}}, {"lambda", lambda}, {"iters", o.collinearity_iters},
                {"seeds", o.collinearity_seeds}, {"teacher_widths", {3}}, {"teacher_nu", 3.0}, {"noise_std", 0.1}};
    r.tolerances = {{"min_abs_cosine", 0.99}, {"seeds_required", "all but one"},
                    {"boundary", 1e-6}, {"vanish_fraction", 1e-3}};
    const auto act = Activation::relu();
    const TeacherSpec teacher = scaled_relu_teacher(2, WidthVector({3}), 3.0, 12345 + o.seed);
    TrainOptions opts;
    opts.step_size = 0.1;
    opts.decay_horizon = 1000.0;
    opts.max_iters = o.collinearity_iters;
    nlohmann::json rows = nlohmann::json::array();
    std::size_t good = 0;
    for (std::size_t s = 0; s < o.collinearity_seeds; ++s) {
        const Dataset ds = sample_dataset(teacher, 16, 0.1, InputDistribution::uniform_ball, o.seed + 1000 + s);
        const NetParams init = init_uniform(2, WidthVector({8}), o.seed + s);
        const auto res = train(init, act, ds, lambda, LossSpec::mse(), Regularizer::pesv(), opts);
        const auto rep = collinearity_report(res.params, act, ds.inputs);
        std::size_t pairs = 0;
        for (const auto& g : rep.groups) {
            pairs += g.members.size() * (g.members.size() - 1) / 2;
        }
        const bool ok = rep.global_min_abs_cosine >= 0.99;
        good += ok ? 1 : 0;
        rows.push_back({{"seed", o.seed + s},
                        {"objective", res.best_objective},
                        {"min_abs_cosine", rep.global_min_abs_cosine},
                        {"pairs", pairs},
                        {"boundary", rep.boundary.size()},
                        {"vanishing", rep.vanishing.size()},
                        {"pass", ok}});
    }
    r.outputs = {{"runs", rows},
                 {"passing_seeds", good},
                 {"caveat", "trained nets are near-stationary, not certified global minimizers"}};
    r.pass = good + 1 >= o.collinearity_seeds;
    return r;
}

/// Documented equivalence run: relu, d = 2, n = 32, widths (16), lambda = 0.01, teacher with
/// widths (3) and nu = 1, noise 0.1, step 0.1 / sqrt(1 + t / 1000).
[[nodiscard]] inline OracleReport run_equivalence(const SuiteOptions& o)
{
    OracleReport r;
    r.name = "equivalence";
    r.soft = true;
    const double lambda = 0.01;
    r.inputs = {{"d", 2}, {"n", 32}, {"widths", {16}}, {"lambda", lambda}, {"iters", o.equivalence_iters},
                {"seeds", o.equivalence_seeds}, {"teacher_widths", {3}}, {"teacher_nu", 1.0}, {"noise_std", 0.1}};
    r.tolerances = {{"median_gap_weight_decay", 0.05}};
    const TeacherSpec teacher = scaled_relu_teacher(2, WidthVector({3}), 1.0, 12345 + o.seed);
    const Dataset ds = sample_dataset(teacher, 32, 0.1, InputDistribution::uniform_ball, o.seed + 2024);
    EquivalenceOptions eo;
    eo.train.step_size = 0.1;
    eo.train.decay_horizon = 1000.0;
    eo.train.max_iters = o.equivalence_iters;
    std::vector<std::uint64_t> seeds;
    for (std::size_t s = 0; s < o.equivalence_seeds; ++s) {
        seeds.push_back(o.seed + s);
    }
    const auto res = equivalence_check_relu(ds, lambda, WidthVector({16}), seeds, eo);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& x : res.rows) {
        rows.push_back({{"seed", x.seed},
                        {"lambda_wd", x.lambda_wd},
                        {"lambda_mixed", x.lambda_mixed},
                        {"pesv", x.pesv_objective},
                        {"weight_decay", x.wd_objective},
                        {"mixed_max", x.mixed_objective},
                        {"weight_decay_as_pesv", x.wd_as_pesv},
                        {"mixed_max_as_pesv", x.mixed_as_pesv},
                        {"pesv_as_weight_decay", x.pesv_as_wd},
                        {"pesv_as_mixed_max", x.pesv_as_mixed},
                        {"gap_weight_decay", x.gap_wd},
                        {"gap_mixed_max", x.gap_mixed}});
    }
    r.outputs = {{"runs", rows}, {"median_gap_weight_decay", res.median_gap_wd},
                 {"median_gap_mixed_max", res.median_gap_mixed}};
    r.pass = res.pass;
    return r;
}

/// Runs one suite by name; throws DomainError for an unknown name.
[[nodiscard]] inline OracleReport run_suite(const std::string& name, const SuiteOptions& o)
{
    if (name == "lemmas") return run_lemmas(o);
    if (name == "maurey") return run_maurey(o);
    if (name == "rademacher") return run_rademacher(o);
    if (name == "entropy") return run_entropy(o);
    if (name == "pointwise") return run_pointwise(o);
    if (name == "collinearity") return run_collinearity(o);
    if (name == "equivalence") return run_equivalence(o);
    throw DomainError("unknown suite '" + name + "'");
}

} // namespace pesvlab::oracles

#endif // PESVLAB_ORACLES_SUITES_HPP

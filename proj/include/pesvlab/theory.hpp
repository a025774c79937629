#ifndef PESVLAB_THEORY_HPP
#define PESVLAB_THEORY_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "format.hpp"
#include "loss.hpp"
#include "width_vector.hpp"

namespace pesvlab::theory {

/// Problem constants shared by the bound formulas. Logarithms are natural throughout.
struct BoundConfig {
    double n{10000};
    double d{1};
    std::size_t depth{2};
    double lipschitz{1.0};  // L_sigma
    double noise_std{0.0};  // sigma_eps
    double target_norm{1.0};  // M, an upper bound on ||f*|| (teacher PeSV norm)
    double dudley_c{1.0};   // c
    double envelope_C{1.0};  // C
    double lambda_C1{1.0};  // C_1

    void validate() const
    {
        if (!(n >= 2.0)) {
            throw DomainError("bounds need n >= 2");
        }
        if (!(d > 0.0) || depth < 2 || !(lipschitz > 0.0)) {
            throw DomainError("bounds need d > 0, L >= 2 and L_sigma > 0");
        }
        if (!(noise_std >= 0.0) || !(target_norm >= 0.0)) {
            throw DomainError("noise level and target norm must be nonnegative");
        }
        if (!(dudley_c > 0.0) || !(envelope_C > 0.0) || !(lambda_C1 > 0.0)) {
            throw DomainError("constants c, C, C1 must be positive");
        }
    }

    /// D_sigma = L_sigma^L
    [[nodiscard]] double activation_constant() const { return std::pow(lipschitz, static_cast<double>(depth)); }
};

enum class Regime { over, under, encompassing };

[[nodiscard]] inline std::string to_string(Regime r)
{
    switch (r) {
    case Regime::over: return "over";
    case Regime::under: return "under";
    case Regime::encompassing: return "encompassing";
    }
    return "unknown";
}

/// A bound split into its bias and variance terms; total = C (bias + variance).
struct BoundReport {
    double bias_term{0.0};
    double variance_term{0.0};
    Regime regime{Regime::encompassing};
    double lambda_used{0.0};
    double total{0.0};
    bool over_condition{false};  // H(m) below the overparametrized-regime threshold
    BoundConfig config{};
};

[[nodiscard]] inline nlohmann::json to_json(const BoundReport& r)
{
    nlohmann::json j;
    j["bias"] = r.bias_term;
    j["variance"] = r.variance_term;
    j["total"] = r.total;
    j["regime"] = to_string(r.regime);
    j["lambda"] = r.lambda_used;
    j["over_condition"] = r.over_condition;
    j["constants"] = {{"n", r.config.n},
                      {"d", r.config.d},
                      {"L", r.config.depth},
                      {"L_sigma", r.config.lipschitz},
                      {"D_sigma", r.config.activation_constant()},
                      {"sigma_eps", r.config.noise_std},
                      {"M", r.config.target_norm},
                      {"c", r.config.dudley_c},
                      {"C", r.config.envelope_C},
                      {"C1", r.config.lambda_C1}};
    return j;
}

namespace detail {

inline void check_depth(const BoundConfig& cfg, const WidthVector& m)
{
    if (m.depth() != cfg.depth) {
        throw DomainError("width vector " + m.to_string() + " does not match depth L = " + std::to_string(cfg.depth));
    }
}

inline double ipow(double base, std::size_t e) { return std::pow(base, static_cast<double>(e)); }

inline double log_rate(double n) { return std::sqrt(std::log(n) / n); }

} // namespace detail

/// H(m) = sum_i (sqrt5 L_sigma)^{L-1-i} / sqrt(m^up_i) over the maximum nondecreasing component.
[[nodiscard]] inline double h_of_m(const WidthVector& m, double lipschitz)
{
    const auto up = max_nondecreasing_component(m);
    const std::size_t hidden = up.size();
    const double base = std::sqrt(5.0) * lipschitz;
    double h = 0.0;
    for (std::size_t i = 1; i <= hidden; ++i) {
        h += detail::ipow(base, hidden - i) / std::sqrt(static_cast<double>(up[i - 1]));
    }
    return h;
}

/// L2 approximation error bound H(m) (R + 2) ||f|| for targets supported in a radius-R ball.
[[nodiscard]] inline double approx_bound_l2(const WidthVector& m, double lipschitz, double radius, double target_norm)
{
    if (!(radius > 0.0)) {
        throw DomainError("support radius must be positive");
    }
    return h_of_m(m, lipschitz) * (radius + 2.0) * target_norm;
}

/// Sup-norm approximation rate for deep relu networks of depth L > 20 and width M > 162:
/// C_d ||f|| ((L-20)^2 (M-162)^2 (log_3 M - 4))^{-1/d}.
[[nodiscard]] inline double approx_bound_inf_relu(double depth, double width, double d, double target_norm,
                                                  double c_d = 1.0)
{
    if (!(depth > 20.0) || !(width > 162.0)) {
        throw DomainError("sup-norm approximation rate needs L > 20 and M > 162");
    }
    if (!(d > 0.0)) {
        throw DomainError("dimension must be positive");
    }
    const double log3 = std::log(width) / std::log(3.0);
    const double inner = (depth - 20.0) * (depth - 20.0) * (width - 162.0) * (width - 162.0) * (log3 - 4.0);
    return c_d * target_norm * std::pow(inner, -1.0 / d);
}

/// Sup-norm metric entropy bound of the unit PeSV ball of width vector m:
/// (d m_1 + prod m) ln(1 + 4 (m_1 ... m_{L-2}) L_sigma^{L-1} / delta).
[[nodiscard]] inline double metric_entropy_bound(double delta, const WidthVector& m, double d, double lipschitz)
{
    if (!(delta > 0.0)) {
        throw DomainError("covering radius must be positive");
    }
    double inner = 1.0;
    for (std::size_t i = 0; i + 1 < m.size(); ++i) {
        inner *= static_cast<double>(m[i]);
    }
    const double dof = d * static_cast<double>(m[0]) + m.product();
    return dof * std::log1p(4.0 * inner * detail::ipow(lipschitz, m.size()) / delta);
}

/// Rademacher bound 2^{L-1} c L_sigma^{L-1} F sqrt(d n) for the PeSV ball of radius F.
[[nodiscard]] inline double rademacher_bound(const WidthVector& m, double radius, double d, double n,
                                             double lipschitz, double c = 1.0)
{
    if (!(radius >= 0.0)) {
        throw DomainError("class radius must be nonnegative");
    }
    const std::size_t hidden = m.size();
    return detail::ipow(2.0, hidden) * c * detail::ipow(lipschitz, hidden) * radius * std::sqrt(d * n);
}

/// delta_n = (2 L_sigma)^{L-1} (prod m) d ln n / n
[[nodiscard]] inline double delta_n(double n, double d, const WidthVector& m, double lipschitz)
{
    if (!(n >= 2.0)) {
        throw DomainError("delta_n needs n >= 2");
    }
    return detail::ipow(2.0 * lipschitz, m.size()) * m.product() * d * std::log(n) / n;
}

/// max{12 D_sigma, 2^{L+1} c L_sigma^{L-1} sqrt d}, the overparametrized variance coefficient.
[[nodiscard]] inline double over_variance_coefficient(const BoundConfig& cfg)
{
    return std::max(12.0 * cfg.activation_constant(),
                    detail::ipow(2.0, cfg.depth + 1) * cfg.dudley_c * detail::ipow(cfg.lipschitz, cfg.depth - 1) *
                        std::sqrt(cfg.d));
}

/// Overparametrized variance rate: coefficient * sqrt(ln n / n).
[[nodiscard]] inline double over_rate(const BoundConfig& cfg)
{
    return over_variance_coefficient(cfg) * detail::log_rate(cfg.n);
}

/// Underparametrized variance rate: (prod m) d ln n / n.
[[nodiscard]] inline double under_rate(const BoundConfig& cfg, const WidthVector& m)
{
    return m.product() * cfg.d * std::log(cfg.n) / cfg.n;
}

/// lambda_1 = max{6 D_sigma, 2^L c L_sigma^{L-1} sqrt d} sigma_eps sqrt(ln n / n).
[[nodiscard]] inline double lambda_overparam(const BoundConfig& cfg)
{
    cfg.validate();
    const double coef = std::max(6.0 * cfg.activation_constant(), detail::ipow(2.0, cfg.depth) * cfg.dudley_c *
                                                                       detail::ipow(cfg.lipschitz, cfg.depth - 1) *
                                                                       std::sqrt(cfg.d));
    return coef * cfg.noise_std * detail::log_rate(cfg.n);
}

/// lambda_2 = C_1 sigma_eps max{delta_n, H(m)^2}.
[[nodiscard]] inline double lambda_underparam(const BoundConfig& cfg, const WidthVector& m)
{
    cfg.validate();
    detail::check_depth(cfg, m);
    const double h = h_of_m(m, cfg.lipschitz);
    return cfg.lambda_C1 * cfg.noise_std * std::max(delta_n(cfg.n, cfg.d, m, cfg.lipschitz), h * h);
}

/// Whether H(m) <= sqrt(max{6 D_sigma, 2^L c L_sigma^{L-1} sqrt d} / C_1).
[[nodiscard]] inline bool over_regime_condition(const BoundConfig& cfg, const WidthVector& m)
{
    const double coef = std::max(6.0 * cfg.activation_constant(), detail::ipow(2.0, cfg.depth) * cfg.dudley_c *
                                                                       detail::ipow(cfg.lipschitz, cfg.depth - 1) *
                                                                       std::sqrt(cfg.d));
    return h_of_m(m, cfg.lipschitz) <= std::sqrt(coef / cfg.lambda_C1);
}

namespace detail {

inline BoundReport mse_report(const BoundConfig& cfg, const WidthVector& m, double rate, Regime regime, double lambda)
{
    const double h = h_of_m(m, cfg.lipschitz);
    const double norm_sq = cfg.target_norm * cfg.target_norm;
    BoundReport r;
    r.bias_term = h * h * norm_sq;
    r.variance_term = (cfg.noise_std * cfg.noise_std + norm_sq) * rate;
    r.total = cfg.envelope_C * (r.bias_term + r.variance_term);
    r.regime = regime;
    r.lambda_used = lambda;
    r.over_condition = over_regime_condition(cfg, m);
    r.config = cfg;
    return r;
}

} // namespace detail

/// Overparametrized generalization bound C {H^2 M^2 + coef (sigma^2 + M^2) sqrt(ln n / n)}.
[[nodiscard]] inline BoundReport gen_bound_over(const BoundConfig& cfg, const WidthVector& m)
{
    cfg.validate();
    detail::check_depth(cfg, m);
    return detail::mse_report(cfg, m, over_rate(cfg), Regime::over, lambda_overparam(cfg));
}

/// Underparametrized generalization bound C {H^2 M^2 + (sigma^2 + M^2) (prod m) d ln n / n}.
[[nodiscard]] inline BoundReport gen_bound_under(const BoundConfig& cfg, const WidthVector& m)
{
    cfg.validate();
    detail::check_depth(cfg, m);
    return detail::mse_report(cfg, m, under_rate(cfg, m), Regime::under, lambda_underparam(cfg, m));
}

/// Encompassing bound: the variance takes the smaller of the two rates; lambda = max(lambda_1, lambda_2).
/// The regime label names the active branch.
[[nodiscard]] inline BoundReport gen_bound_encompassing(const BoundConfig& cfg, const WidthVector& m)
{
    cfg.validate();
    detail::check_depth(cfg, m);
    const double over = over_rate(cfg);
    const double under = under_rate(cfg, m);
    const Regime active = over < under ? Regime::over : Regime::under;
    return detail::mse_report(cfg, m, std::min(over, under), active,
                              std::max(lambda_overparam(cfg), lambda_underparam(cfg, m)));
}

/// Encompassing bound with H(m) and prod m replaced by their width/bottleneck envelopes.
[[nodiscard]] inline BoundReport gen_bound_simplified(const BoundConfig& cfg, const WidthVector& m)
{
    cfg.validate();
    detail::check_depth(cfg, m);
    const std::size_t hidden = m.size();
    const double q = std::sqrt(5.0) * cfg.lipschitz;
    const double geometric = q == 1.0 ? static_cast<double>(hidden) : (detail::ipow(q, hidden) - 1.0) / (q - 1.0);
    const double norm_sq = cfg.target_norm * cfg.target_norm;
    const double over = over_rate(cfg);
    const double under = detail::ipow(static_cast<double>(m.width()), hidden) * cfg.d * std::log(cfg.n) / cfg.n;
    BoundReport r;
    r.bias_term = geometric * geometric / static_cast<double>(m.bottleneck()) * norm_sq;
    r.variance_term = (cfg.noise_std * cfg.noise_std + norm_sq) * std::min(over, under);
    r.total = cfg.envelope_C * (r.bias_term + r.variance_term);
    r.regime = over < under ? Regime::over : Regime::under;
    r.lambda_used = std::max(lambda_overparam(cfg), lambda_underparam(cfg, m));
    r.over_condition = over_regime_condition(cfg, m);
    r.config = cfg;
    return r;
}

/// Encompassing bound for a general Lipschitz loss with tail level T:
/// C {L_0 H M + 2 B T + (sigma^2 + M^2) min(max{12 L_{1,y} D, 2^{L+2} c L_{1,y} L_sigma^{L-1} sqrt d}
/// sqrt(ln n / n), (prod m) d ln n / n)}. The 2BT tail counts toward bias_term.
[[nodiscard]] inline BoundReport gen_bound_general_loss(const BoundConfig& cfg, const LossSpec& loss,
                                                        const WidthVector& m, double tail)
{
    cfg.validate();
    detail::check_depth(cfg, m);
    if (!(tail > 0.0)) {
        throw DomainError("tail level T must be positive");
    }
    const double l1y = loss.target_lipschitz();
    const double dsig = cfg.activation_constant();
    const double coef =
        std::max(12.0 * l1y * dsig, detail::ipow(2.0, cfg.depth + 2) * cfg.dudley_c * l1y *
                                        detail::ipow(cfg.lipschitz, cfg.depth - 1) * std::sqrt(cfg.d));
    const double over = coef * detail::log_rate(cfg.n);
    const double under = under_rate(cfg, m);
    const double h = h_of_m(m, cfg.lipschitz);
    const double lambda1 = std::max(6.0 * l1y * dsig, detail::ipow(2.0, cfg.depth + 1) * cfg.dudley_c * l1y *
                                                          detail::ipow(cfg.lipschitz, cfg.depth - 1) *
                                                          std::sqrt(cfg.d)) *
                           cfg.noise_std * detail::log_rate(cfg.n);
    BoundReport r;
    r.bias_term = loss.lipschitz() * h * cfg.target_norm + 2.0 * loss.curvature_bound() * tail;
    r.variance_term = (cfg.noise_std * cfg.noise_std + cfg.target_norm * cfg.target_norm) * std::min(over, under);
    r.total = cfg.envelope_C * (r.bias_term + r.variance_term);
    r.regime = over < under ? Regime::over : Regime::under;
    r.lambda_used = std::max(lambda1, lambda_underparam(cfg, m));
    r.over_condition = over_regime_condition(cfg, m);
    r.config = cfg;
    return r;
}

/// Minimax lower-bound shape C / sqrt(n ln n).
[[nodiscard]] inline double lower_bound_shape(double n, double c = 1.0)
{
    if (!(n >= 2.0)) {
        throw DomainError("lower bound needs n >= 2");
    }
    return c / std::sqrt(n * std::log(n));
}

struct SweepPoint {
    std::size_t m{0};
    WidthVector widths{1};
    BoundReport report;
};

struct SweepResult {
    std::vector<SweepPoint> curve;
    std::optional<std::size_t> saturation_width;  // first m whose variance uses the sqrt(ln n / n) cap
    std::vector<std::size_t> local_minima;
    std::vector<std::size_t> local_maxima;
};

/// Evaluates the encompassing bound along m -> m * pattern and locates the interior extrema of
/// the total by the sign changes of its finite differences. Widths must ascend strictly.
[[nodiscard]] inline SweepResult double_descent_sweep(const BoundConfig& cfg, const std::vector<std::size_t>& widths,
                                                      const WidthVector& pattern)
{
    if (widths.empty()) {
        throw DomainError("sweep needs at least one width");
    }
    for (std::size_t i = 1; i < widths.size(); ++i) {
        if (widths[i] <= widths[i - 1]) {
            throw DomainError("sweep widths must be strictly ascending");
        }
    }
    SweepResult out;
    out.curve.reserve(widths.size());
    for (std::size_t m : widths) {
        if (m == 0) {
            throw DomainError("sweep widths must be positive");
        }
        auto mv = pattern.scaled(m);
        auto report = gen_bound_encompassing(cfg, mv);
        if (!out.saturation_width && report.regime == Regime::over) {
            out.saturation_width = m;
        }
        out.curve.push_back({m, std::move(mv), report});
    }
    // Plateaus are skipped: compare each point against the nearest strictly different neighbours.
    const auto& c = out.curve;
    std::size_t i = 1;
    while (i + 1 < c.size()) {
        std::size_t j = i;
        while (j + 1 < c.size() && c[j + 1].report.total == c[i].report.total) {
            ++j;
        }
        if (j + 1 >= c.size()) {
            break;
        }
        const double left = c[i - 1].report.total;
        const double mid = c[i].report.total;
        const double right = c[j + 1].report.total;
        if (mid < left && mid < right) {
            out.local_minima.push_back(c[i].m);
        } else if (mid > left && mid > right) {
            out.local_maxima.push_back(c[i].m);
        }
        i = j + 1;
    }
    return out;
}

/// CSV with header m,bias,variance,total,regime,lambda.
[[nodiscard]] inline std::string sweep_csv(const SweepResult& sweep)
{
    std::string s = "m,bias,variance,total,regime,lambda\n";
    for (const auto& p : sweep.curve) {
        s += std::to_string(p.m) + "," + format_double(p.report.bias_term) + "," +
             format_double(p.report.variance_term) + "," + format_double(p.report.total) + "," +
             to_string(p.report.regime) + "," + format_double(p.report.lambda_used) + "\n";
    }
    return s;
}

} // namespace pesvlab::theory

#endif // PESVLAB_THEORY_HPP

#ifndef PESVLAB_CLI_CONFIG_HPP
#define PESVLAB_CLI_CONFIG_HPP

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <pesvlab/activation.hpp>
#include <pesvlab/data.hpp>
#include <pesvlab/loss.hpp>
#include <pesvlab/oracles/suites.hpp>
#include <pesvlab/theory.hpp>
#include <pesvlab/train.hpp>
#include <pesvlab/width_vector.hpp>

namespace pesvlab::cli {

/// Bad configuration; the message carries file, line and field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Entry {
    std::string value;
    std::size_t line{0};
};

/// Sections of key = value lines. '#' and ';' start comments.
class IniDocument {
public:
    static IniDocument parse(const std::string& text, const std::string& source)
    {
        static const std::set<std::string> known{"problem", "network", "loss", "optimizer", "bounds", "verify"};
        IniDocument doc;
        doc.source_ = source;
        std::istringstream in(text);
        std::string raw;
        std::string section;
        std::size_t line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            std::string line = strip(raw.substr(0, raw.find_first_of("#;")));
            if (line.empty()) {
                continue;
            }
            if (line.front() == '[') {
                if (line.back() != ']') {
                    throw ConfigError(doc.where(line_no) + "unterminated section header '" + line + "'");
                }
                section = strip(line.substr(1, line.size() - 2));
                if (!known.contains(section)) {
                    throw ConfigError(doc.where(line_no) + "unknown section [" + section + "]");
                }
                doc.sections_[section];
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(doc.where(line_no) + "expected key = value, got '" + line + "'");
            }
            if (section.empty()) {
                throw ConfigError(doc.where(line_no) + "key outside of any section");
            }
            const std::string key = strip(line.substr(0, eq));
            const std::string value = strip(line.substr(eq + 1));
            if (key.empty()) {
                throw ConfigError(doc.where(line_no) + "empty key");
            }
            auto [it, inserted] = doc.sections_[section].emplace(key, Entry{value, line_no});
            if (!inserted) {
                throw ConfigError(doc.where(line_no) + "[" + section + "] " + key + ": duplicate key (first set on line " +
                                  std::to_string(it->second.line) + ")");
            }
        }
        return doc;
    }

    [[nodiscard]] const Entry* find(const std::string& section, const std::string& key) const
    {
        auto s = sections_.find(section);
        if (s == sections_.end()) {
            return nullptr;
        }
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }

    [[nodiscard]] std::string where(std::size_t line) const { return source_ + ":" + std::to_string(line) + ": "; }
    [[nodiscard]] const std::string& source() const noexcept { return source_; }
    [[nodiscard]] const std::map<std::string, std::map<std::string, Entry>>& sections() const noexcept
    {
        return sections_;
    }

    static std::string strip(const std::string& s)
    {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) {
            return "";
        }
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

private:
    std::string source_;
    std::map<std::string, std::map<std::string, Entry>> sections_;
};

/// Parses "1..1000", "1,2,4,8" or mixes such as "1..10,20,40".
[[nodiscard]] inline std::vector<std::size_t> parse_width_list(const std::string& spec)
{
    std::vector<std::size_t> out;
    auto parse_one = [](const std::string& s) {
        std::size_t v = 0;
        const auto t = IniDocument::strip(s);
        const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc{} || p != t.data() + t.size() || v == 0) {
            throw std::invalid_argument("'" + t + "' is not a positive integer");
        }
        return v;
    };
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (IniDocument::strip(item).empty()) {
            continue;
        }
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_one(item));
            continue;
        }
        const std::size_t lo = parse_one(item.substr(0, dots));
        const std::size_t hi = parse_one(item.substr(dots + 2));
        if (hi < lo) {
            throw std::invalid_argument("range " + IniDocument::strip(item) + " is descending");
        }
        for (std::size_t v = lo; v <= hi; ++v) {
            out.push_back(v);
        }
    }
    if (out.empty()) {
        throw std::invalid_argument("width list is empty");
    }
    return out;
}

struct ProblemConfig {
    std::size_t n{200};
    std::size_t d{1};
    double noise_std{0.1};
    std::optional<double> target_norm;  // M; defaults to the teacher norm (train, sweep) or 1 (bound)
    std::uint64_t seed{0};
    std::string teacher{"random"};  // random | zero | path to a model file
    WidthVector teacher_widths{3};
    double teacher_norm{1.0};
    InputDistribution input_distribution{InputDistribution::uniform_ball};
    std::size_t test_samples{2000};
};

struct NetworkConfig {
    Activation activation{Activation::relu()};
    WidthVector widths{8};
    double init_gain{1.0};
};

struct OptimizerConfig {
    std::optional<double> lambda;  // empty means the encompassing-bound schedule
    Regularizer regularizer{Regularizer::pesv()};
    TrainOptions options{};
};

struct BoundsConfig {
    std::vector<std::size_t> widths;
    std::optional<WidthVector> pattern;
    std::optional<double> lipschitz;
    double dudley_c{1.0};
    double envelope_C{1.0};
    double lambda_C1{1.0};
    std::string svg;
};

struct Config {
    ProblemConfig problem;
    NetworkConfig network;
    LossSpec loss{LossSpec::mse()};
    OptimizerConfig optimizer;
    BoundsConfig bounds;
    oracles::SuiteOptions verify;
    std::filesystem::path base_dir;

    /// Hidden-width pattern for bound sweeps; all ones over the network's hidden layers by default.
    [[nodiscard]] WidthVector pattern() const
    {
        return bounds.pattern ? *bounds.pattern
                              : WidthVector(std::vector<std::size_t>(network.widths.size(), 1));
    }

    [[nodiscard]] theory::BoundConfig bound_config(double target_norm) const
    {
        theory::BoundConfig b;
        b.n = static_cast<double>(problem.n);
        b.d = static_cast<double>(problem.d);
        b.depth = pattern().depth();
        b.lipschitz = bounds.lipschitz.value_or(network.activation.lipschitz());
        b.noise_std = problem.noise_std;
        b.target_norm = problem.target_norm.value_or(target_norm);
        b.dudley_c = bounds.dudley_c;
        b.envelope_C = bounds.envelope_C;
        b.lambda_C1 = bounds.lambda_C1;
        b.validate();
        return b;
    }
};

namespace detail {

/// Typed access to one document. Every read marks the key as known; leftovers are errors.
class Reader {
public:
    explicit Reader(const IniDocument& doc) : doc_(doc) {}

    [[nodiscard]] const Entry* raw(const std::string& section, const std::string& key)
    {
        used_.insert(section + "." + key);
        return doc_.find(section, key);
    }

    [[noreturn]] void fail(const std::string& section, const std::string& key, const Entry& e,
                           const std::string& expected)
    {
        throw ConfigError(doc_.where(e.line) + "[" + section + "] " + key + ": expected " + expected + ", got '" +
                          e.value + "'");
    }

    double real(const std::string& section, const std::string& key, double fallback, bool positive = false,
                bool nonnegative = false)
    {
        const Entry* e = raw(section, key);
        if (e == nullptr) {
            return fallback;
        }
        double v = 0.0;
        const auto [p, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
        if (e->value.empty() || ec != std::errc{} || p != e->value.data() + e->value.size() || !std::isfinite(v)) {
            fail(section, key, *e, "a number");
        }
        if (positive && !(v > 0.0)) {
            fail(section, key, *e, "a positive number");
        }
        if (nonnegative && !(v >= 0.0)) {
            fail(section, key, *e, "a nonnegative number");
        }
        return v;
    }

    std::optional<double> optional_real(const std::string& section, const std::string& key, bool nonnegative = true)
    {
        if (doc_.find(section, key) == nullptr) {
            used_.insert(section + "." + key);
            return std::nullopt;
        }
        return real(section, key, 0.0, false, nonnegative);
    }

    std::uint64_t integer(const std::string& section, const std::string& key, std::uint64_t fallback,
                          std::uint64_t minimum = 0)
    {
        const Entry* e = raw(section, key);
        if (e == nullptr) {
            return fallback;
        }
        std::uint64_t v = 0;
        const auto [p, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
        if (e->value.empty() || ec != std::errc{} || p != e->value.data() + e->value.size()) {
            fail(section, key, *e, "a nonnegative integer");
        }
        if (v < minimum) {
            fail(section, key, *e, "an integer >= " + std::to_string(minimum));
        }
        return v;
    }

    std::string text(const std::string& section, const std::string& key, const std::string& fallback)
    {
        const Entry* e = raw(section, key);
        return e == nullptr ? fallback : e->value;
    }

    std::string choice(const std::string& section, const std::string& key, const std::string& fallback,
                       const std::vector<std::string>& options)
    {
        const Entry* e = raw(section, key);
        if (e == nullptr) {
            return fallback;
        }
        for (const auto& o : options) {
            if (e->value == o) {
                return o;
            }
        }
        std::string list;
        for (const auto& o : options) {
            list += (list.empty() ? "" : "|") + o;
        }
        fail(section, key, *e, "one of " + list);
    }

    std::optional<std::vector<std::size_t>> widths(const std::string& section, const std::string& key)
    {
        const Entry* e = raw(section, key);
        if (e == nullptr) {
            return std::nullopt;
        }
        try {
            return parse_width_list(e->value);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(doc_.where(e->line) + "[" + section + "] " + key + ": " + ex.what());
        }
    }

    void reject_unknown() const
    {
        for (const auto& [section, keys] : doc_.sections()) {
            for (const auto& [key, entry] : keys) {
                if (!used_.contains(section + "." + key)) {
                    throw ConfigError(doc_.where(entry.line) + "unknown key '" + key + "' in [" + section + "]");
                }
            }
        }
    }

private:
    const IniDocument& doc_;
    std::set<std::string> used_;
};

} // namespace detail

[[nodiscard]] inline Config parse_config(const std::string& text, const std::string& source,
                                         const std::filesystem::path& base_dir = {})
{
    const IniDocument doc = IniDocument::parse(text, source);
    detail::Reader r(doc);
    Config c;
    c.base_dir = base_dir;

    auto& p = c.problem;
    p.n = r.integer("problem", "n", p.n, 2);
    p.d = r.integer("problem", "d", p.d, 1);
    p.noise_std = r.real("problem", "noise_std", p.noise_std, false, true);
    p.target_norm = r.optional_real("problem", "target_norm");
    p.seed = r.integer("problem", "seed", p.seed);
    p.teacher = r.text("problem", "teacher", p.teacher);
    if (auto w = r.widths("problem", "teacher_widths")) {
        p.teacher_widths = WidthVector(*w);
    }
    p.teacher_norm = r.real("problem", "teacher_norm", p.teacher_norm, false, true);
    p.input_distribution = r.choice("problem", "input_distribution", "uniform_ball",
                                    {"uniform_ball", "uniform_sphere"}) == "uniform_ball"
                               ? InputDistribution::uniform_ball
                               : InputDistribution::uniform_sphere;
    p.test_samples = r.integer("problem", "test_samples", p.test_samples, 2);

    const std::string act = r.choice("network", "activation", "relu", {"relu", "leaky_relu", "identity"});
    const double alpha = r.real("network", "alpha", 0.01);
    if (act == "relu") {
        c.network.activation = Activation::relu();
    } else if (act == "identity") {
        c.network.activation = Activation::identity();
    } else {
        if (!(alpha >= 0.0 && alpha < 1.0)) {
            const Entry* e = doc.find("network", "alpha");
            r.fail("network", "alpha", *e, "a slope in [0, 1)");
        }
        c.network.activation = Activation::leaky_relu(alpha);
    }
    if (auto w = r.widths("network", "widths")) {
        c.network.widths = WidthVector(*w);
    }
    c.network.init_gain = r.real("network", "init_gain", c.network.init_gain, true);

    const std::string loss = r.choice("loss", "kind", "mse", {"mse", "logistic", "huber"});
    const double huber_delta = r.real("loss", "huber_delta", 1.0, true);
    c.loss = loss == "mse" ? LossSpec::mse() : loss == "logistic" ? LossSpec::logistic() : LossSpec::huber(huber_delta);

    auto& o = c.optimizer;
    if (const Entry* e = r.raw("optimizer", "lambda"); e != nullptr && e->value != "auto") {
        o.lambda = r.real("optimizer", "lambda", 0.0, false, true);
    }
    const std::string reg = r.choice("optimizer", "regularizer", "pesv", {"pesv", "weight_decay", "mixed_max"});
    const double mp = r.real("optimizer", "p", 1.0);
    const double mq = r.real("optimizer", "q", 2.0);
    if (reg == "mixed_max" && !(mp >= 1.0 && mq >= 1.0)) {
        throw ConfigError(source + ": [optimizer] p, q: mixed max exponents must be >= 1");
    }
    o.regularizer = reg == "pesv" ? Regularizer::pesv()
                    : reg == "weight_decay" ? Regularizer::weight_decay()
                                            : Regularizer::mixed_max(mp, mq);
    o.options.step_size = r.real("optimizer", "step_size", 0.1, true);
    o.options.schedule = r.choice("optimizer", "schedule", "inverse_sqrt", {"inverse_sqrt", "constant"}) == "constant"
                             ? StepSchedule::constant
                             : StepSchedule::inverse_sqrt;
    o.options.decay_horizon = r.real("optimizer", "decay_horizon", 1000.0, true);
    o.options.max_iters = r.integer("optimizer", "max_iters", 1000, 1);
    o.options.tolerance = r.real("optimizer", "tolerance", 0.0, false, true);
    o.options.seed = p.seed;

    auto& b = c.bounds;
    b.widths = r.widths("bounds", "widths").value_or(std::vector<std::size_t>{});
    if (b.widths.empty()) {
        for (std::size_t m = 1; m <= 100; ++m) {
            b.widths.push_back(m);
        }
    }
    if (auto w = r.widths("bounds", "pattern")) {
        b.pattern = WidthVector(*w);
    }
    if (auto l = r.optional_real("bounds", "lipschitz")) {
        if (!(*l > 0.0)) {
            r.fail("bounds", "lipschitz", *doc.find("bounds", "lipschitz"), "a positive number");
        }
        b.lipschitz = l;
    }
    b.dudley_c = r.real("bounds", "c", 1.0, true);
    b.envelope_C = r.real("bounds", "C", 1.0, true);
    b.lambda_C1 = r.real("bounds", "C1", 1.0, true);
    b.svg = r.text("bounds", "svg", "");

    auto& v = c.verify;
    v.seed = p.seed;
    v.lemma1_max_n = static_cast<unsigned>(r.integer("verify", "lemma1_max_n", v.lemma1_max_n, 2));
    v.lemma2_max_n = static_cast<unsigned>(r.integer("verify", "lemma2_max_n", v.lemma2_max_n, 2));
    v.maurey_trials = r.integer("verify", "maurey_trials", v.maurey_trials, 2);
    v.rademacher_trials = r.integer("verify", "rademacher_trials", v.rademacher_trials, 2);
    v.rademacher_starts = r.integer("verify", "rademacher_starts", v.rademacher_starts, 1);
    v.rademacher_iters = r.integer("verify", "rademacher_iters", v.rademacher_iters, 0);
    v.packing_samples = r.integer("verify", "packing_samples", v.packing_samples, 1);
    v.packing_seeds = r.integer("verify", "packing_seeds", v.packing_seeds, 1);
    v.pointwise_nets = r.integer("verify", "pointwise_nets", v.pointwise_nets, 1);
    v.pointwise_probes = r.integer("verify", "pointwise_probes", v.pointwise_probes, 1);
    v.collinearity_iters = r.integer("verify", "collinearity_iters", v.collinearity_iters, 1);
    v.collinearity_seeds = r.integer("verify", "collinearity_seeds", v.collinearity_seeds, 1);
    v.equivalence_iters = r.integer("verify", "equivalence_iters", v.equivalence_iters, 1);
    v.equivalence_seeds = r.integer("verify", "equivalence_seeds", v.equivalence_seeds, 1);

    r.reject_unknown();
    return c;
}

/// Reads and parses a config file; an unreadable file is a ConfigError.
[[nodiscard]] inline Config load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string() + ": cannot read config file");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string(), path.parent_path());
}

} // namespace pesvlab::cli

#endif // PESVLAB_CLI_CONFIG_HPP

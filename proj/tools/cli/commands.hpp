#ifndef PESVLAB_CLI_COMMANDS_HPP
#define PESVLAB_CLI_COMMANDS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ios>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <pesvlab/pesvlab.hpp>

#include "config.hpp"

namespace pesvlab::cli {

enum ExitCode : int { ok = 0, checks_failed = 1, usage = 2, io = 3, divergence = 4 };

struct Options {
    std::string command;
    std::string config;
    std::string out;
    std::size_t jobs{1};
    bool no_timestamp{false};
    std::string suite{"all"};
    std::size_t trials{1};
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string timestamp_line(const Options& o)
{
    if (o.no_timestamp) {
        return "";
    }
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string("# generated ") + buf + "\n";
}

inline void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << content;
    out.flush();
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

inline std::size_t edit_distance(const std::string& a, const std::string& b)
{
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        row[j] = j;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

inline NetParams random_params(std::size_t d, const WidthVector& widths, double norm, std::uint64_t seed)
{
    NetParams p = init_uniform(d, widths, seed);
    const double nu = pesv_norm(p);
    if (nu > 0.0) {
        for (double& v : p.output().data()) {
            v *= norm / nu;
        }
    }
    return p;
}

inline TeacherSpec resolve_teacher(const Config& c)
{
    const auto& p = c.problem;
    if (p.teacher == "random") {
        return TeacherSpec(Model{random_params(p.d, p.teacher_widths, p.teacher_norm, p.seed + 7919),
                                 c.network.activation});
    }
    if (p.teacher == "zero") {
        return TeacherSpec(Model{NetParams::zeros(p.d, p.teacher_widths), c.network.activation});
    }
    const std::filesystem::path path = c.base_dir / p.teacher;
    Model m;
    try {
        m = load_model(path.string());
    } catch (const std::exception& e) {
        throw ConfigError("[problem] teacher: " + std::string(e.what()));
    }
    if (m.params.input_dim() != p.d) {
        throw ConfigError("[problem] teacher: model has input dimension " + std::to_string(m.params.input_dim()) +
                          ", config has d = " + std::to_string(p.d));
    }
    return TeacherSpec(std::move(m));
}

inline double resolve_lambda(const Config& c, const WidthVector& widths, double teacher_nu)
{
    if (c.optimizer.lambda) {
        return *c.optimizer.lambda;
    }
    theory::BoundConfig b = c.bound_config(teacher_nu);
    b.depth = widths.depth();
    return theory::gen_bound_encompassing(b, widths).lambda_used;
}

/// Minimal line chart of y against x.
inline std::string svg_line_chart(const std::vector<double>& xs, const std::vector<double>& ys,
                                  const std::string& x_label, const std::string& y_label)
{
    const double w = 640, h = 400, pad = 50;
    const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
    const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
    const double xs_span = std::max(*xmax - *xmin, 1e-300), ys_span = std::max(*ymax - *ymin, 1e-300);
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
    s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double px = pad + (xs[i] - *xmin) / xs_span * (w - 2 * pad);
        const double py = h - pad - (ys[i] - *ymin) / ys_span * (h - 2 * pad);
        s << format_double(px) << "," << format_double(py) << (i + 1 < xs.size() ? " " : "");
    }
    s << "\"/>\n";
    s << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
    s << "<text x=\"14\" y=\"" << h / 2 << "\" transform=\"rotate(-90 14 " << h / 2 << ")\" text-anchor=\"middle\">"
      << y_label << "</text>\n";
    s << "<text x=\"" << pad << "\" y=\"" << pad - 10 << "\">" << format_double(*ymax) << "</text>\n";
    s << "<text x=\"" << pad << "\" y=\"" << h - pad + 16 << "\">" << format_double(*ymin) << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

} // namespace detail

inline int cmd_bound(const Options& o, std::ostream& out, std::ostream& err)
{
    const Config c = load_config(o.config);
    const theory::BoundConfig b = c.bound_config(1.0);
    const auto sweep = theory::double_descent_sweep(b, c.bounds.widths, c.pattern());
    const std::string csv = detail::timestamp_line(o) + theory::sweep_csv(sweep);
    std::ostream& summary = o.out.empty() ? err : out;
    if (o.out.empty()) {
        out << csv;
    } else {
        detail::write_file(o.out, csv);
    }
    if (!c.bounds.svg.empty()) {
        std::vector<double> xs, ys;
        for (const auto& p : sweep.curve) {
            xs.push_back(static_cast<double>(p.m));
            ys.push_back(p.report.total);
        }
        detail::write_file(c.bounds.svg, detail::svg_line_chart(xs, ys, "width m", "bound"));
    }
    auto list = [&](const std::vector<std::size_t>& ms) {
        std::string s;
        for (std::size_t m : ms) {
            const auto& p = sweep.curve[static_cast<std::size_t>(
                std::find(c.bounds.widths.begin(), c.bounds.widths.end(), m) - c.bounds.widths.begin())];
            s += (s.empty() ? "" : ", ") + std::string("m=") + std::to_string(m) + " total=" +
                 format_double(p.report.total);
        }
        return s.empty() ? std::string("none") : s;
    };
    summary << "widths: " << c.bounds.widths.size() << " points, pattern " << c.pattern().to_string() << "\n";
    summary << "local minima: " << list(sweep.local_minima) << "\n";
    summary << "local maxima: " << list(sweep.local_maxima) << "\n";
    summary << "regime switch (first overparametrized width): "
            << (sweep.saturation_width ? std::to_string(*sweep.saturation_width) : std::string("none")) << "\n";
    return ok;
}

inline int cmd_train(const Options& o, std::ostream& out, std::ostream& err)
{
    const Config c = load_config(o.config);
    const TeacherSpec teacher = detail::resolve_teacher(c);
    const auto& p = c.problem;
    const Dataset data = sample_dataset(teacher, p.n, p.noise_std, p.input_distribution, p.seed);
    const NetParams init = init_uniform(p.d, c.network.widths, p.seed, c.network.init_gain);
    const double lambda = detail::resolve_lambda(c, c.network.widths, teacher.nu());
    const std::string prefix = o.out.empty() ? std::string("pesvlab") : o.out;
    const std::string model_path = prefix + ".model.json";
    const std::string trace_path = prefix + ".trace.csv";

    TrainResult r;
    try {
        r = train(init, c.network.activation, data, lambda, c.loss, c.optimizer.regularizer, c.optimizer.options);
    } catch (const DivergenceError& e) {
        save_model(Model{e.last_finite(), c.network.activation}, model_path);
        detail::write_file(trace_path, detail::timestamp_line(o) + trace_csv(e.trace()));
        err << "error: " << e.what() << "; last finite iterate saved to " << model_path << "\n";
        return divergence;
    }
    try {
        save_model(Model{r.params, c.network.activation}, model_path);
    } catch (const std::ios_base::failure& e) {
        throw IoError(e.what());
    }
    detail::write_file(trace_path, detail::timestamp_line(o) + trace_csv(r.trace));

    const auto mc = generalization_error_mc(r.params, c.network.activation, teacher, p.test_samples, p.seed + 1,
                                            p.input_distribution);
    out << "lambda: " << format_double(lambda) << "\n";
    out << "final objective: " << format_double(r.best_objective) << " (iteration " << r.best_iteration << ")\n";
    out << "nu: " << format_double(pesv_norm(r.params)) << "\n";
    out << "empirical error: " << format_double(empirical_error(r.params, c.network.activation, teacher, data))
        << "\n";
    out << "generalization error (mc): " << format_double(mc.mean) << " +- " << format_double(mc.standard_error)
        << "\n";
    out << "wrote " << model_path << ", " << trace_path << "\n";
    return ok;
}

struct SweepRow {
    std::size_t m{0};
    std::uint64_t seed{0};
    double lambda{0.0};
    double objective{0.0};
    double nu{0.0};
    double empirical{0.0};
    McEstimate generalization{};
    double bound{0.0};
};

inline int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err)
{
    if (o.trials == 0) {
        throw UsageError("--trials must be at least 1");
    }
    const Config c = load_config(o.config);
    const TeacherSpec teacher = detail::resolve_teacher(c);
    const auto& p = c.problem;
    const WidthVector pattern = c.pattern();
    theory::BoundConfig bcfg = c.bound_config(teacher.nu());

    std::vector<Dataset> datasets;
    for (std::size_t t = 0; t < o.trials; ++t) {
        datasets.push_back(sample_dataset(teacher, p.n, p.noise_std, p.input_distribution, p.seed + t));
    }
    const std::size_t tasks = c.bounds.widths.size() * o.trials;
    std::vector<SweepRow> rows(tasks);
    std::vector<std::exception_ptr> errors(tasks);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < tasks; i = next++) {
            try {
                const std::size_t m = c.bounds.widths[i / o.trials];
                const std::size_t t = i % o.trials;
                const WidthVector widths = pattern.scaled(m);
                const std::uint64_t seed = p.seed + i;
                const NetParams init = init_uniform(p.d, widths, seed, c.network.init_gain);
                SweepRow row;
                row.m = m;
                row.seed = seed;
                row.lambda = detail::resolve_lambda(c, widths, teacher.nu());
                TrainOptions opts = c.optimizer.options;
                opts.seed = seed;
                const auto r =
                    train(init, c.network.activation, datasets[t], row.lambda, c.loss, c.optimizer.regularizer, opts);
                row.objective = r.best_objective;
                row.nu = pesv_norm(r.params);
                row.empirical = empirical_error(r.params, c.network.activation, teacher, datasets[t]);
                row.generalization = generalization_error_mc(r.params, c.network.activation, teacher, p.test_samples,
                                                             seed + 1, p.input_distribution);
                row.bound = theory::gen_bound_encompassing(bcfg, widths).total;
                rows[i] = row;
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(o.jobs, tasks));
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::string csv = detail::timestamp_line(o) +
                      "m,seed,lambda,objective,nu,empirical_error,generalization_error,generalization_se,bound\n";
    for (const auto& r : rows) {
        csv += std::to_string(r.m) + "," + std::to_string(r.seed) + "," + format_double(r.lambda) + "," +
               format_double(r.objective) + "," + format_double(r.nu) + "," + format_double(r.empirical) + "," +
               format_double(r.generalization.mean) + "," + format_double(r.generalization.standard_error) + "," +
               format_double(r.bound) + "\n";
    }
    if (o.out.empty()) {
        out << csv;
    } else {
        detail::write_file(o.out, csv);
        out << "wrote " << rows.size() << " rows to " << o.out << "\n";
    }
    (void)err;
    return ok;
}

inline int cmd_verify(const Options& o, std::ostream& out, std::ostream& err)
{
    const auto& names = oracles::suite_names();
    std::vector<std::string> selected;
    if (o.suite == "all") {
        selected = names;
    } else if (std::find(names.begin(), names.end(), o.suite) != names.end()) {
        selected = {o.suite};
    } else {
        std::string best = "all";
        std::size_t best_d = detail::edit_distance(o.suite, best);
        for (const auto& n : names) {
            const std::size_t d = detail::edit_distance(o.suite, n);
            if (d < best_d) {
                best_d = d;
                best = n;
            }
        }
        throw UsageError("unknown suite '" + o.suite + "'; did you mean '" + best + "'?");
    }
    const Config c = load_config(o.config);
    nlohmann::json report;
    if (!o.no_timestamp) {
        report["generated"] = detail::timestamp_line(o).substr(12, 20);
    }
    report["suites"] = nlohmann::json::array();
    bool hard_pass = true;
    std::vector<std::string> soft_failures;
    std::ostream& log = o.out.empty() ? err : out;
    for (const auto& name : selected) {
        const auto r = oracles::run_suite(name, c.verify);
        report["suites"].push_back(oracles::to_json(r));
        if (r.soft) {
            if (!r.pass) {
                soft_failures.push_back(name);
            }
        } else {
            hard_pass = hard_pass && r.pass;
        }
        log << (r.pass ? "PASS " : "FAIL ") << name << (r.soft ? " (soft)" : "") << "\n";
    }
    report["pass"] = hard_pass;
    report["soft_failures"] = soft_failures;
    const std::string text = report.dump(2) + "\n";
    if (o.out.empty()) {
        out << text;
    } else {
        detail::write_file(o.out, text);
    }
    return hard_pass ? ok : checks_failed;
}

/// Parses the command line and dispatches. Never throws; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Path-norm regularized networks: bounds, training and verification"};
    app.name("pesvlab");
    app.require_subcommand(1, 1);
    Options o;
    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config, "configuration file")->required();
        sub->add_option("--out", o.out, "output path (train: file prefix)");
        sub->add_option("--jobs", o.jobs, "parallel jobs")->check(CLI::PositiveNumber);
        sub->add_flag("--no-timestamp", o.no_timestamp, "omit the generated-at header line");
    };
    auto* bound = app.add_subcommand("bound", "evaluate the encompassing bound over a width sweep");
    auto* train_cmd = app.add_subcommand("train", "train one network");
    auto* verify = app.add_subcommand("verify", "run verification suites");
    auto* sweep = app.add_subcommand("sweep", "train across widths and seeds");
    for (auto* sub : {bound, train_cmd, verify, sweep}) {
        add_common(sub);
    }
    verify->add_option("--suite", o.suite, "lemmas|maurey|rademacher|entropy|pointwise|collinearity|equivalence|all");
    sweep->add_option("--trials", o.trials, "seeds per width");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage;
    }
    try {
        if (bound->parsed()) {
            return cmd_bound(o, out, err);
        }
        if (train_cmd->parsed()) {
            return cmd_train(o, out, err);
        }
        if (verify->parsed()) {
            return cmd_verify(o, out, err);
        }
        return cmd_sweep(o, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return usage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return usage;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return io;
    } catch (const std::ios_base::failure& e) {
        err << "i/o error: " << e.what() << "\n";
        return io;
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << "\n";
        return divergence;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return usage;
    } catch (const std::domain_error& e) {
        err << "config error: " << e.what() << "\n";
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return usage;
    }
}

} // namespace pesvlab::cli

#endif // PESVLAB_CLI_COMMANDS_HPP

#pragma once

// Run configuration and batch orchestration: certification runs, eps sweeps,
// cross-validation against the finite-difference solver, and report files.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "layerlab/bounds.hpp"
#include "layerlab/core.hpp"
#include "layerlab/fd_oracle.hpp"
#include "layerlab/io.hpp"
#include "layerlab/perturbed.hpp"
#include "layerlab/reduced_wave.hpp"

namespace layerlab::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Task { certify_green, certify_error, sweep_convergence, cross_validate, emit_fields };

inline constexpr std::pair<Task, std::string_view> task_names[] = {
    {Task::certify_green, "certify-green"},
    {Task::certify_error, "certify-error"},
    {Task::sweep_convergence, "sweep-convergence"},
    {Task::cross_validate, "cross-validate"},
    {Task::emit_fields, "emit-fields"},
};

inline std::string_view to_string(Task t) {
    for (const auto& [task, name] : task_names)
        if (task == t) return name;
    return "?";
}

inline Task parse_task(std::string_view name) {
    for (const auto& [task, n] : task_names)
        if (n == name) return task;
    throw ConfigError("unknown task '" + std::string(name) + "'");
}

struct Tolerances {
    double series_tol = 1e-6;  ///< Green tail truncation, relative to the envelope
    double cert_margin = 1.0;  ///< largest admissible margin ratio
    double xval_tol = 1e-3;    ///< spectral vs finite-difference max difference
    double order_tol = 0.2;    ///< admissible deviation of the fitted eps order from 1
};

struct GreenSampling {
    int nx = 101;
    int nt = 200;
    double t_max = 50.0;
};

/// Initial-boundary data selection.
///   standing_wave: f0 = amplitude sin(gamma_mode x)
///   sine_cubed:    f0 = amplitude sin^3(gamma_1 x)
///   forced:        f0 = f1 = 0, source = amplitude sin(gamma_mode x)
struct DataSpec {
    std::string profile = "standing_wave";
    int mode = 1;
    double amplitude = 1.0;
};

struct RunConfig {
    ProblemConfig problem;
    ExponentParams exponents;
    Grid grid;
    std::vector<double> sweep;
    int modes = 256;
    Tolerances tolerances;
    GreenSampling green;
    DataSpec data;
    std::string output_dir;
    std::vector<Task> tasks{Task::certify_green, Task::certify_error, Task::sweep_convergence, Task::cross_validate};
    int workers = 1;
    bool emit_plot_data = false;
};

inline IbcData make_data(const DataSpec& spec, const ProblemConfig& cfg) {
    const double amp = spec.amplitude;
    if (spec.profile == "standing_wave") return standing_wave(cfg, spec.mode, amp);
    IbcData d;
    if (spec.profile == "sine_cubed") {
        const double g = cfg.gamma(1);
        d.f0 = [=](double x) { return amp * std::pow(std::sin(g * x), 3); };
        d.f1 = [](double) { return 0.0; };
        return d;
    }
    if (spec.profile == "forced") {
        const double g = cfg.gamma(spec.mode);
        d.f0 = [](double) { return 0.0; };
        d.f1 = [](double) { return 0.0; };
        d.source = [=](double x, double) { return amp * std::sin(g * x); };
        return d;
    }
    throw ConfigError("data.profile: unknown profile '" + spec.profile + "'");
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, out);
    if (res.ec != std::errc() || res.ptr != end) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

inline int to_int(const std::string& key, const std::string& v) {
    int out = 0;
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, out);
    if (res.ec != std::errc() || res.ptr != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline void apply(RunConfig& rc, const std::string& key, const std::string& v, bool& eps_only) {
    if (key == "problem.l") rc.problem.l = to_double(key, v);
    else if (key == "problem.c") rc.problem.c = to_double(key, v);
    else if (key == "problem.eps") { rc.problem.eps = to_double(key, v); eps_only = true; }
    else if (key == "sweep") {
        rc.sweep.clear();
        for (const auto& s : split_list(v)) rc.sweep.push_back(to_double(key, s));
        eps_only = false;
    }
    else if (key == "exponents.alpha") rc.exponents.alpha = to_double(key, v);
    else if (key == "exponents.beta") rc.exponents.beta = to_double(key, v);
    else if (key == "exponents.delta") rc.exponents.delta = to_double(key, v);
    else if (key == "exponents.gamma") rc.exponents.gamma = to_double(key, v);
    else if (key == "grid.nx") rc.grid.nx = to_int(key, v);
    else if (key == "grid.nt") rc.grid.nt = to_int(key, v);
    else if (key == "grid.t_max") rc.grid.t_max = to_double(key, v);
    else if (key == "modes") rc.modes = to_int(key, v);
    else if (key == "tolerances.series_tol") rc.tolerances.series_tol = to_double(key, v);
    else if (key == "tolerances.cert_margin") rc.tolerances.cert_margin = to_double(key, v);
    else if (key == "tolerances.xval_tol") rc.tolerances.xval_tol = to_double(key, v);
    else if (key == "tolerances.order_tol") rc.tolerances.order_tol = to_double(key, v);
    else if (key == "green.nx") rc.green.nx = to_int(key, v);
    else if (key == "green.nt") rc.green.nt = to_int(key, v);
    else if (key == "green.t_max") rc.green.t_max = to_double(key, v);
    else if (key == "data.profile") rc.data.profile = v;
    else if (key == "data.mode") rc.data.mode = to_int(key, v);
    else if (key == "data.amplitude") rc.data.amplitude = to_double(key, v);
    else if (key == "output.dir") rc.output_dir = v;
    else if (key == "tasks") {
        rc.tasks.clear();
        for (const auto& s : split_list(v)) rc.tasks.push_back(parse_task(s));
    }
    else if (key == "workers") rc.workers = to_int(key, v);
    else if (key == "emit_plot_data") rc.emit_plot_data = to_bool(key, v);
    else throw ConfigError("unknown configuration key '" + key + "'");
}

inline void parse_lines(RunConfig& rc, std::istream& in, const std::string& origin, bool& eps_only) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value', got '" + t + "'");
        apply(rc, trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)), eps_only);
    }
}

}  // namespace detail

/// Checks every RunConfig invariant, naming the offending field.
inline void validate(const RunConfig& rc) {
    if (rc.sweep.empty()) throw ConfigError("sweep: must list at least one eps value");
    for (std::size_t i = 0; i < rc.sweep.size(); ++i) {
        if (!(rc.sweep[i] > 0.0)) throw ConfigError("sweep: every eps must be > 0, got " + fmt17(rc.sweep[i]));
        if (i > 0 && !(rc.sweep[i] < rc.sweep[i - 1]))
            throw ConfigError("sweep: values must be strictly decreasing (" + fmt17(rc.sweep[i - 1]) + " then " +
                              fmt17(rc.sweep[i]) + ")");
    }
    const auto& t = rc.tolerances;
    if (!(t.series_tol > 0.0)) throw ConfigError("tolerances.series_tol must be > 0");
    if (!(t.cert_margin > 0.0)) throw ConfigError("tolerances.cert_margin must be > 0");
    if (!(t.xval_tol > 0.0)) throw ConfigError("tolerances.xval_tol must be > 0");
    if (!(t.order_tol > 0.0)) throw ConfigError("tolerances.order_tol must be > 0");
    if (rc.modes < 1) throw ConfigError("modes must be >= 1");
    if (rc.workers < 1) throw ConfigError("workers must be >= 1");
    if (rc.green.nx < 2 || rc.green.nt < 1 || !(rc.green.t_max > 0.0))
        throw ConfigError("green: need nx >= 2, nt >= 1, t_max > 0");
    if (rc.data.mode < 1) throw ConfigError("data.mode must be >= 1");
    try {
        validate_grid(rc.grid);
        for (double e : rc.sweep) validate_config(rc.problem.with_eps(e), rc.exponents);
        (void)make_data(rc.data, rc.problem);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

/// Parses a flat key = value file, then applies overrides ("key=value") in order.
inline RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    RunConfig rc;
    bool eps_only = false;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read config file '" + path + "'");
        detail::parse_lines(rc, in, path, eps_only);
    }
    for (const auto& o : overrides) {
        std::istringstream in(o);
        detail::parse_lines(rc, in, "override", eps_only);
    }
    if (eps_only) rc.sweep = {rc.problem.eps};
    if (!rc.sweep.empty()) rc.problem.eps = rc.sweep.front();
    validate(rc);
    return rc;
}

struct JobResult {
    Task task = Task::certify_green;
    double eps = 0.0;
    bool passed = false;
    std::string detail;
};

struct RunResult {
    int exit_code = 0;
    std::vector<JobResult> jobs;
    std::string first_failure;
};

/// Least-squares slope of log(y) against log(x).
inline double fitted_order(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return NAN;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace detail {

namespace fs = std::filesystem;

inline void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
}

inline void write_plot(const fs::path& dir, const std::string& stem, const std::vector<std::pair<double, double>>& pts) {
    fs::create_directories(dir);
    std::string s;
    for (const auto& [a, b] : pts) s += fmt17(a) + ' ' + fmt17(b) + '\n';
    write_file(dir / (stem + ".dat"), s);
}

inline void write_report(const RunConfig& rc, const fs::path& out, const std::string& stem, const EnvelopeReport& rep) {
    std::ostringstream os;
    write_csv(os, rep);
    write_file(out / (stem + ".csv"), os.str());
    if (rc.emit_plot_data) {
        std::vector<std::pair<double, double>> a, b;
        for (const auto& s : rep.samples) {
            a.emplace_back(s.t, s.sampled_max);
            b.emplace_back(s.t, s.envelope);
        }
        write_plot(out / "plot", stem + "_sampled", a);
        write_plot(out / "plot", stem + "_envelope", b);
    }
}

inline std::string describe_margin(const EnvelopeReport& rep) {
    return "max margin_ratio " + fmt17(rep.max_margin()) + " over " + std::to_string(rep.samples.size()) + " times";
}

inline JobResult job_certify_green(const RunConfig& rc, double eps, const fs::path& out) {
    const ProblemConfig cfg = rc.problem.with_eps(eps);
    std::vector<double> times;
    for (int j = 1; j <= rc.green.nt; ++j) times.push_back(rc.green.t_max * j / rc.green.nt);
    const auto rep = certify_green(cfg, rc.exponents, rc.green.nx, times, rc.tolerances.series_tol,
                                   rc.tolerances.cert_margin);
    write_report(rc, out, "green_cert_eps" + fmt_label(eps), rep);
    return {Task::certify_green, eps, rep.passed, describe_margin(rep)};
}

/// A from the reduced solution over [0, max(T, horizon)], then r on the
/// horizon grid of Q_eps, certified against the error envelope.
inline JobResult job_certify_error(const RunConfig& rc, double eps, const fs::path& out) {
    const ProblemConfig cfg = rc.problem.with_eps(eps);
    const IbcData data = make_data(rc.data, cfg);
    const double horizon = q_epsilon_horizon(cfg, rc.exponents);
    Grid sup_grid = rc.grid;
    sup_grid.t_max = std::max(rc.grid.t_max, horizon);
    const ReducedSolution sup_sol = solve_reduced(data, cfg, sup_grid, rc.modes);
    const double A = sup_bound_A(compute_F(sup_sol), compute_lambda(sup_sol), sup_sol);

    Grid q_grid = rc.grid;
    q_grid.t_max = horizon;
    const PerturbedRun run = run_perturbed(data, cfg, q_grid, rc.modes, Decomposition::exp_decay_w);
    const auto consts = error_envelope_constants(cfg, rc.exponents, A);
    const auto rep = certify_error(run.r, consts, cfg, rc.exponents, rc.tolerances.cert_margin);
    write_report(rc, out, "error_cert_eps" + fmt_label(eps), rep);
    return {Task::certify_error, eps, rep.passed,
            "A " + fmt17(A) + ", horizon " + fmt17(horizon) + ", sup|r| " + fmt17(run.r.max_abs()) + ", " +
                describe_margin(rep)};
}

inline double additive_deviation(const RunConfig& rc, double eps, const Grid& grid) {
    const ProblemConfig cfg = rc.problem.with_eps(eps);
    const PerturbedRun run = run_perturbed(make_data(rc.data, cfg), cfg, grid, rc.modes, Decomposition::additive_eps_r);
    const Field u0 = run.reduced.field();
    double m = 0.0;
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.nt; ++j) m = std::max(m, std::abs(run.assembled(i, j) - u0(i, j)));
    return m;
}

inline JobResult job_sweep(const RunConfig& rc, const fs::path& out) {
    std::vector<double> eps, diff;
    std::string csv = "eps,max_diff_u0,fitted_order\n";
    std::vector<std::pair<double, double>> plot;
    for (double e : rc.sweep) {
        eps.push_back(e);
        diff.push_back(additive_deviation(rc, e, rc.grid));
        csv += fmt17(e) + ',' + fmt17(diff.back()) + ',' + fmt17(fitted_order(eps, diff)) + '\n';
        plot.emplace_back(e, diff.back());
    }
    write_file(out / "convergence.csv", csv);
    if (rc.emit_plot_data) write_plot(out / "plot", "convergence", plot);
    const double order = fitted_order(eps, diff);
    const bool ok = eps.size() >= 2 && std::abs(order - 1.0) <= rc.tolerances.order_tol;
    return {Task::sweep_convergence, rc.sweep.front(), ok, "fitted order " + fmt17(order)};
}

inline double spectral_fd_difference(const RunConfig& rc, const ProblemConfig& cfg, const Grid& grid) {
    const IbcData data = make_data(rc.data, cfg);
    const PerturbedRun run = run_perturbed(data, cfg, grid, rc.modes, Decomposition::additive_eps_r);
    const Field fd = fd_solve(data, cfg, FdScheme::for_grid(grid, cfg), grid);
    double m = 0.0;
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.nt; ++j) m = std::max(m, std::abs(run.assembled(i, j) - fd(i, j)));
    return m;
}

inline Grid refined(const Grid& g) { return {2 * g.nx - 1, 2 * g.nt - 1, g.t_max}; }

inline JobResult job_cross_validate(const RunConfig& rc, double eps, const fs::path& out) {
    const ProblemConfig cfg = rc.problem.with_eps(eps);
    std::string csv = "eps,dx,dt,max_diff\n";
    const Grid base = rc.grid, fine = refined(rc.grid);
    const double d0 = spectral_fd_difference(rc, cfg, base);
    const double d1 = spectral_fd_difference(rc, cfg, fine);
    csv += fmt17(eps) + ',' + fmt17(base.dx(cfg.l)) + ',' + fmt17(base.dt()) + ',' + fmt17(d0) + '\n';
    csv += fmt17(eps) + ',' + fmt17(fine.dx(cfg.l)) + ',' + fmt17(fine.dt()) + ',' + fmt17(d1) + '\n';
    write_file(out / ("xval_eps" + fmt_label(eps) + ".csv"), csv);
    return {Task::cross_validate, eps, d0 <= rc.tolerances.xval_tol,
            "max_diff " + fmt17(d0) + " (tol " + fmt17(rc.tolerances.xval_tol) + "), refinement factor " +
                fmt17(d0 / d1)};
}

inline JobResult job_emit_fields(const RunConfig& rc, double eps, const fs::path& out) {
    const ProblemConfig cfg = rc.problem.with_eps(eps);
    const IbcData data = make_data(rc.data, cfg);
    const PerturbedRun add = run_perturbed(data, cfg, rc.grid, rc.modes, Decomposition::additive_eps_r);
    const PerturbedRun w = run_perturbed(data, cfg, rc.grid, rc.modes, Decomposition::exp_decay_w);
    const Field u0 = add.reduced.field();
    std::string csv = "x,t,u0,u_eps,w,r_w\n";
    const Grid& g = rc.grid;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nt; ++j)
            csv += fmt17(g.x(i, cfg.l)) + ',' + fmt17(g.t(j)) + ',' + fmt17(u0(i, j)) + ',' +
                   fmt17(add.assembled(i, j)) + ',' + fmt17(w.assembled(i, j)) + ',' + fmt17(w.r(i, j)) + '\n';
    write_file(out / ("fields_eps" + fmt_label(eps) + ".csv"), csv);
    return {Task::emit_fields, eps, true, std::to_string(g.nx * g.nt) + " samples"};
}

}  // namespace detail

/// Output directory: explicit value, else $LAYERLAB_OUT, else ./layerlab_out.
inline std::string resolve_output_dir(const std::string& configured) {
    if (!configured.empty()) return configured;
    if (const char* env = std::getenv("LAYERLAB_OUT"); env && *env) return env;
    return "layerlab_out";
}

/// Executes every requested task; jobs are (task, eps) pairs, except the sweep
/// which is a single job over all eps.  Exit code 0 iff no job failed.
inline RunResult run(const RunConfig& rc) {
    namespace fs = std::filesystem;
    const fs::path out = resolve_output_dir(rc.output_dir);
    fs::create_directories(out);

    struct Job {
        Task task;
        double eps;
    };
    std::vector<Job> jobs;
    for (Task t : rc.tasks) {
        if (t == Task::sweep_convergence) {
            jobs.push_back({t, rc.sweep.front()});
            continue;
        }
        for (double e : rc.sweep) jobs.push_back({t, e});
    }

    std::vector<JobResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const Job& j = jobs[i];
            try {
                switch (j.task) {
                    case Task::certify_green: results[i] = detail::job_certify_green(rc, j.eps, out); break;
                    case Task::certify_error: results[i] = detail::job_certify_error(rc, j.eps, out); break;
                    case Task::sweep_convergence: results[i] = detail::job_sweep(rc, out); break;
                    case Task::cross_validate: results[i] = detail::job_cross_validate(rc, j.eps, out); break;
                    case Task::emit_fields: results[i] = detail::job_emit_fields(rc, j.eps, out); break;
                }
            } catch (const std::exception& e) {
                results[i] = {j.task, j.eps, false, std::string("error: ") + e.what()};
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(rc.workers, static_cast<int>(jobs.size())));
    {
        std::vector<std::jthread> pool;
        for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
        worker();
    }

    RunResult res;
    res.jobs = results;
    std::string summary;
    int failures = 0;
    if (jobs.empty()) summary += "no tasks\n";
    for (const auto& r : results) {
        summary += std::string(to_string(r.task)) + " eps=" + fmt_label(r.eps) + ' ' + (r.passed ? "PASS" : "FAIL") +
                   ' ' + r.detail + '\n';
        if (!r.passed) {
            ++failures;
            if (res.first_failure.empty()) res.first_failure = std::string(to_string(r.task)) + " eps=" + fmt_label(r.eps);
        }
    }
    summary += "failures: " + std::to_string(failures) + '\n';
    detail::write_file(out / "summary.txt", summary);
    res.exit_code = failures == 0 ? 0 : 1;
    return res;
}

}  // namespace layerlab::cli

#pragma once

// Modal impulse responses of the damped string and the Green-function sine series
//
//   G(x, xi, t) = (2/l) sum_n H_n(t) sin(gamma_n x) sin(gamma_n xi),
//
// where H_n solves  h'' + eps gamma_n^2 h' + c^2 gamma_n^2 h = 0,  h(0) = 0, h'(0) = 1.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "layerlab/core.hpp"

namespace layerlab {

/// Relative band |n - k| <= tol_crit k inside which a mode is treated as critically damped.
inline constexpr double tol_crit = 1e-9;

enum class Regime { underdamped, critical, overdamped };

inline const char* to_string(Regime r) noexcept {
    switch (r) {
        case Regime::underdamped: return "underdamped";
        case Regime::critical: return "critical";
        case Regime::overdamped: return "overdamped";
    }
    return "?";
}

struct ModalAmplitude {
    int n = 1;
    Regime regime = Regime::underdamped;
    double damping = 0.0;            ///< a_n = b n^2
    double discriminant_root = 0.0;  ///< sqrt|1 - (k/n)^2|
};

inline ModalAmplitude classify_mode(int n, const ProblemConfig& cfg) {
    if (n < 1) detail::fail("mode index must be >= 1, got ", n);
    const double k = cfg.k();
    const double nn = static_cast<double>(n);
    ModalAmplitude m;
    m.n = n;
    m.damping = cfg.damping(n);
    // 1 - (k/n)^2 written as a product to keep precision near n = k.
    const double disc = (nn - k) * (nn + k) / (nn * nn);
    m.discriminant_root = std::sqrt(std::abs(disc));
    if (std::abs(nn - k) <= tol_crit * k)
        m.regime = Regime::critical;
    else if (nn < k)
        m.regime = Regime::underdamped;
    else
        m.regime = Regime::overdamped;
    return m;
}

namespace detail {

/// Closed-form response at t, without argument checks.
inline double modal_response(const ModalAmplitude& m, double k, double t) noexcept {
    const double a = m.damping;
    const double s = m.discriminant_root;
    switch (m.regime) {
        case Regime::critical:
            return t * std::exp(-a * t);
        case Regime::underdamped: {
            const double w = a * s;
            return std::exp(-a * t) * std::sin(w * t) / w;
        }
        case Regime::overdamped: {
            const double nn = static_cast<double>(m.n);
            const double ratio = k / nn;
            // a (1 - s) = a (k/n)^2 / (1 + s): the slow decay rate, free of cancellation.
            const double slow = a * ratio * ratio / (1.0 + s);
            const double w = a * s;
            return std::exp(-slow * t) * (-std::expm1(-2.0 * w * t)) / (2.0 * w);
        }
    }
    return 0.0;
}

}  // namespace detail

/// Impulse response of mode n at time t >= 0: the sin form below the threshold k,
/// the sinh form (evaluated without overflow) above it, and t e^{-a t} at n = k.
inline double modal_amplitude(int n, double t, const ProblemConfig& cfg) {
    if (!(t >= 0.0)) detail::fail("modal_amplitude requires t >= 0, got ", t);
    const ModalAmplitude m = classify_mode(n, cfg);
    if (t == 0.0) return 0.0;
    return detail::modal_response(m, cfg.k(), t);
}

/// Rigorous bound on (2/l) sum_{n > N} |H_n(t)| for N >= ceil(k).
///
/// Each overdamped term obeys |H_n| <= e^{-c^2 t/eps} / (2 a_n s_n); the sum of
/// 1/(2 b n sqrt(n^2 - k^2)) over n > N is dominated by its integral from N,
/// which is arcsin(k/N) / (2 b k).
inline double truncation_bound(std::int64_t N, double t, const ProblemConfig& cfg) {
    validate_problem(cfg);
    const double k = cfg.k();
    const auto n_min = static_cast<std::int64_t>(std::ceil(k));
    if (N < n_min) detail::fail("truncation_bound requires N >= ceil(k) = ", n_min, ", got N = ", N);
    if (N < 1) detail::fail("truncation_bound requires N >= 1, got ", N);
    if (!(t > 0.0)) detail::fail("truncation_bound requires t > 0, got ", t);
    const double ratio = std::min(1.0, k / static_cast<double>(N));
    const double decay = std::exp(-cfg.c * cfg.c * t / cfg.eps);
    return (2.0 / cfg.l) * decay * std::asin(ratio) / (2.0 * cfg.b() * k);
}

/// A mode count N >= max(ceil(k), 1) with truncation_bound(N, t) < tol, within a
/// few terms of the smallest such N.
inline std::int64_t modes_for_tail(double tol, double t, const ProblemConfig& cfg,
                                   std::int64_t max_modes = 2'000'000'000LL) {
    if (!(tol > 0.0)) detail::fail("series tolerance must be > 0, got ", tol);
    if (!(t > 0.0)) detail::fail("modes_for_tail requires t > 0, got ", t);
    const double k = cfg.k();
    const std::int64_t n_min = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(k)));
    const double exponent = cfg.c * cfg.c * t / cfg.eps;
    // bound(N) = P arcsin(k/N) with P = (2/l) e^{-exponent} / (2 b k).
    const double log_p = std::log(2.0 / cfg.l) - exponent - std::log(2.0 * cfg.b() * k);
    const double log_theta = std::log(tol) - log_p;
    std::int64_t N = n_min;
    if (log_theta < std::log(pi / 2.0)) {
        const double guess = k / std::sin(std::exp(log_theta));
        if (!(guess < static_cast<double>(max_modes)))
            detail::fail("tail tolerance ", tol, " at t = ", t, " needs more than ", max_modes, " modes");
        N = std::max(N, static_cast<std::int64_t>(std::ceil(guess)));
    }
    while (truncation_bound(N, t, cfg) >= tol) {
        if (N >= max_modes)
            detail::fail("tail tolerance ", tol, " at t = ", t, " needs more than ", max_modes, " modes");
        N += 1 + N / 1'000'000;
    }
    return N;
}

struct GreenSum {
    double value = 0.0;
    std::int64_t terms = 0;
    double tail_bound = 0.0;
};

/// G(x, xi, t) with the overdamped tail truncated so that its certified bound is below tol.
inline GreenSum green_sum(double x, double xi, double t, const ProblemConfig& cfg, double tol) {
    validate_problem(cfg);
    if (!(tol > 0.0)) detail::fail("green_eval: tolerance must be > 0 (non-certifiable request), got ", tol);
    if (!(t >= 0.0)) detail::fail("green_eval requires t >= 0, got ", t);
    if (x < 0.0 || x > cfg.l || xi < 0.0 || xi > cfg.l)
        detail::fail("green_eval requires x, xi in [0, l], got x = ", x, ", xi = ", xi);
    if (t == 0.0) return {0.0, 0, 0.0};

    const std::int64_t N = modes_for_tail(tol, t, cfg);
    const double k = cfg.k();
    CompensatedSum acc;
    for (std::int64_t n = 1; n <= N; ++n) {
        const ModalAmplitude m = classify_mode(static_cast<int>(n), cfg);
        const double h = detail::modal_response(m, k, t);
        acc.add(h * detail::mode_shape(n, x, cfg.l) * detail::mode_shape(n, xi, cfg.l));
    }
    return {(2.0 / cfg.l) * acc.value(), N, truncation_bound(N, t, cfg)};
}

inline double green_eval(double x, double xi, double t, const ProblemConfig& cfg, double tol) {
    return green_sum(x, xi, t, cfg, tol).value;
}

/// Evaluates max_{i,j} |G(x_i, x_j, t)| over a uniform (x, xi) grid, reusing the
/// sine table between times.
class GreenGridSampler {
public:
    GreenGridSampler(const ProblemConfig& cfg, int nx) : cfg_(cfg), nx_(nx) {
        validate_problem(cfg);
        if (nx < 2) detail::fail("Green sampling grid needs nx >= 2, got ", nx);
    }

    struct Sample {
        double max_abs = 0.0;     ///< max over the grid of the truncated series
        std::int64_t terms = 0;
        double tail_bound = 0.0;  ///< certified bound on the discarded tail
    };

    Sample max_abs(double t, double tol) {
        if (!(t > 0.0)) return {};
        const std::int64_t N = modes_for_tail(tol, t, cfg_);
        ensure_table(N);
        const double k = cfg_.k();
        const auto nx = static_cast<std::size_t>(nx_);
        // Kahan-compensated accumulation of H_n s_i s_j, ascending in n.
        std::vector<double> sum(nx * nx, 0.0), comp(nx * nx, 0.0);
        for (std::int64_t n = 1; n <= N; ++n) {
            const double h = detail::modal_response(classify_mode(static_cast<int>(n), cfg_), k, t);
            const double* s = &table_[static_cast<std::size_t>(n - 1) * nx];
            for (std::size_t i = 0; i < nx; ++i) {
                const double hs = h * s[i];
                double* srow = &sum[i * nx];
                double* crow = &comp[i * nx];
                for (std::size_t j = i; j < nx; ++j) {
                    const double y = hs * s[j] - crow[j];
                    const double tt = srow[j] + y;
                    crow[j] = (tt - srow[j]) - y;
                    srow[j] = tt;
                }
            }
        }
        double m = 0.0;
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = i; j < nx; ++j) m = std::max(m, std::abs(sum[i * nx + j]));
        return {(2.0 / cfg_.l) * m, N, truncation_bound(N, t, cfg_)};
    }

private:
    void ensure_table(std::int64_t N) {
        const std::int64_t period = 2 * static_cast<std::int64_t>(nx_ - 1);
        while (table_modes_ < N) {
            const std::int64_t n = ++table_modes_;
            for (std::int64_t i = 0; i < nx_; ++i) {
                // sin(pi n i / (nx - 1)) with the phase reduced exactly in integers.
                const std::int64_t m = (n % period) * i % period;
                table_.push_back(detail::sin_pi(static_cast<double>(m) / static_cast<double>(nx_ - 1)));
            }
        }
    }

    ProblemConfig cfg_;
    int nx_;
    std::int64_t table_modes_ = 0;
    std::vector<double> table_;
};

}  // namespace layerlab

#pragma once

// Reduced (eps = 0) wave problem  c^2 u_xx - u_tt = -f  solved in the sine basis,
// plus the derived fields that drive the error problems.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "layerlab/core.hpp"

namespace layerlab {

/// Initial-boundary data: u(x,0) = f0, u_t(x,0) = f1, u(0,t) = psi0, u(l,t) = psi1,
/// and an optional space-time source f(x, t).
struct IbcData {
    std::function<double(double)> f0;
    std::function<double(double)> f1;
    double psi0 = 0.0;
    double psi1 = 0.0;
    std::function<double(double, double)> source;
};

inline constexpr double compatibility_tol = 1e-10;

inline void check_compatibility(const IbcData& data, const ProblemConfig& cfg) {
    if (!data.f0) detail::fail("initial displacement f0 is missing");
    const double m0 = std::abs(data.f0(0.0) - data.psi0);
    const double m1 = std::abs(data.f0(cfg.l) - data.psi1);
    if (m0 > compatibility_tol) detail::fail("incompatible data: |f0(0) - psi0| = ", m0);
    if (m1 > compatibility_tol) detail::fail("incompatible data: |f0(l) - psi1| = ", m1);
}

/// f0 = amplitude sin(gamma_mode x); everything else zero.
inline IbcData standing_wave(const ProblemConfig& cfg, int mode = 1, double amplitude = 1.0) {
    const double g = cfg.gamma(mode);
    IbcData d;
    d.f0 = [=](double x) { return amplitude * std::sin(g * x); };
    d.f1 = [](double) { return 0.0; };
    return d;
}

/// Sine coefficients of the static lift psi0 + (psi1 - psi0) x / l.
inline double lift_coefficient(int n, double psi0, double psi1) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return 2.0 / (pi * n) * (psi0 - sign * psi1);
}

namespace detail {

inline int projection_points(int nx, int n_modes) {
    int nq = std::max(nx, 8 * n_modes + 1);
    if (nq % 2 == 0) ++nq;
    return nq;
}

/// Sine projection of samples g(z_i) on a uniform grid of [0, l], composite Simpson.
/// Returns the coefficients; `residual` receives max_i |g(z_i) - synthesis(z_i)|.
inline std::vector<double> project_samples(const std::vector<double>& g, double l, int n_modes,
                                           const Matrix& shapes, const std::vector<double>& w,
                                           double* residual) {
    const std::size_t nq = g.size();
    std::vector<double> coef(static_cast<std::size_t>(n_modes), 0.0);
    for (int n = 1; n <= n_modes; ++n) {
        const auto s = shapes.row(static_cast<std::size_t>(n - 1));
        double acc = 0.0;
        for (std::size_t i = 0; i < nq; ++i) acc += w[i] * g[i] * s[i];
        coef[static_cast<std::size_t>(n - 1)] = 2.0 / l * acc;
    }
    if (residual) {
        double r = 0.0;
        for (std::size_t i = 0; i < nq; ++i) {
            double v = 0.0;
            for (int n = 1; n <= n_modes; ++n) v += coef[static_cast<std::size_t>(n - 1)] * shapes(n - 1, i);
            r = std::max(r, std::abs(g[i] - v));
        }
        *residual = r;
    }
    return coef;
}

}  // namespace detail

/// Reduced solution u0 = lift + sum_n u_n(t) sin(gamma_n x).
struct ReducedSolution {
    ProblemConfig cfg;
    ModalSeries modal;     ///< u_n(t_j)
    ModalSeries velocity;  ///< du_n/dt at t_j
    ModalSeries forcing;   ///< source coefficients f_n(t_j)
    double psi0 = 0.0;
    double psi1 = 0.0;

    [[nodiscard]] const Grid& grid() const noexcept { return modal.grid; }
    [[nodiscard]] double lift(double x) const noexcept { return psi0 + (psi1 - psi0) * x / cfg.l; }
    [[nodiscard]] bool has_lift() const noexcept { return psi0 != 0.0 || psi1 != 0.0; }

    /// u0 on the grid.
    [[nodiscard]] Field field() const {
        Field f = synthesize(modal);
        if (has_lift())
            for (int i = 0; i < f.grid.nx; ++i) {
                const double v = lift(f.grid.x(i, cfg.l));
                for (int j = 0; j < f.grid.nt; ++j) f(i, j) += v;
            }
        return f;
    }
};

/// Solves u_n'' + c^2 gamma_n^2 u_n = f_n with the exact propagator and a Duhamel
/// integral for the source.  Data are projected by composite Simpson on
/// max(nx, 8 n_modes + 1) points; modal.tail_bound records the largest
/// projection residual at those points.
inline ReducedSolution solve_reduced(const IbcData& data, const ProblemConfig& cfg, const Grid& grid,
                                     int n_modes) {
    validate_problem(cfg);
    validate_grid(grid);
    if (n_modes < 1) detail::fail("n_modes must be >= 1, got ", n_modes);
    check_compatibility(data, cfg);

    ReducedSolution sol;
    sol.cfg = cfg;
    sol.psi0 = data.psi0;
    sol.psi1 = data.psi1;
    sol.modal = ModalSeries(grid, n_modes);
    sol.velocity = ModalSeries(grid, n_modes);
    sol.forcing = ModalSeries(grid, n_modes);

    const int nq = detail::projection_points(grid.nx, n_modes);
    const double hq = cfg.l / (nq - 1);
    const std::vector<double> wq = composite_weights(nq - 1, hq);
    Matrix shapes(static_cast<std::size_t>(n_modes), static_cast<std::size_t>(nq));
    for (int n = 1; n <= n_modes; ++n)
        for (int i = 0; i < nq; ++i) shapes(n - 1, i) = detail::grid_mode_shape(n, i, nq);

    std::vector<double> g0(static_cast<std::size_t>(nq)), g1(static_cast<std::size_t>(nq));
    for (int i = 0; i < nq; ++i) {
        const double z = (i == nq - 1) ? cfg.l : hq * i;
        g0[i] = data.f0(z) - sol.lift(z);
        g1[i] = data.f1 ? data.f1(z) : 0.0;
    }
    // Endpoints of f0 - lift are zero up to the compatibility tolerance.
    g0.front() = 0.0;
    g0.back() = 0.0;
    double res0 = 0.0, res1 = 0.0, res_src = 0.0;
    const auto c0 = detail::project_samples(g0, cfg.l, n_modes, shapes, wq, &res0);
    const auto c1 = detail::project_samples(g1, cfg.l, n_modes, shapes, wq, &res1);

    const int nt = grid.nt;
    const double dt = grid.dt();
    bool has_source = static_cast<bool>(data.source);
    if (has_source) {
        std::vector<double> gs(static_cast<std::size_t>(nq));
        for (int j = 0; j < nt; ++j) {
            const double t = grid.t(j);
            for (int i = 0; i < nq; ++i) gs[i] = data.source((i == nq - 1) ? cfg.l : hq * i, t);
            double r = 0.0;
            const auto cs = detail::project_samples(gs, cfg.l, n_modes, shapes, wq, &r);
            res_src = std::max(res_src, r);
            for (int n = 1; n <= n_modes; ++n) sol.forcing.coeffs(n - 1, j) = cs[n - 1];
        }
    }

    for (int n = 1; n <= n_modes; ++n) {
        const double w = cfg.c * cfg.gamma(n);
        auto u = sol.modal.mode(n);
        auto v = sol.velocity.mode(n);
        const double a0 = c0[n - 1], v0 = c1[n - 1];
        for (int j = 0; j < nt; ++j) {
            const double t = grid.t(j);
            const double cs = std::cos(w * t), sn = std::sin(w * t);
            u[j] = a0 * cs + v0 * sn / w;
            v[j] = -a0 * w * sn + v0 * cs;
        }
        if (!has_source) continue;
        const auto f = sol.forcing.mode(n);
        if (std::all_of(f.begin(), f.end(), [](double x) { return x == 0.0; })) continue;
        const auto du = running_convolution(f, dt, [&](double s) { return std::sin(w * s) / w; });
        const auto dv = running_convolution(f, dt, [&](double s) { return std::cos(w * s); });
        for (int j = 0; j < nt; ++j) {
            u[j] += du[j];
            v[j] += dv[j];
        }
    }
    sol.modal.tail_bound = std::max({res0, res1, res_src});
    sol.velocity.tail_bound = sol.modal.tail_bound;
    sol.forcing.tail_bound = res_src;
    return sol;
}

/// F = d_xxt u0, i.e. F_n = -gamma_n^2 du_n/dt (the lift is static and linear).
inline ModalSeries compute_F(const ReducedSolution& sol) {
    ModalSeries F(sol.grid(), sol.modal.n_modes);
    for (int n = 1; n <= F.n_modes; ++n) {
        const double g2 = sol.cfg.gamma(n) * sol.cfg.gamma(n);
        const auto v = sol.velocity.mode(n);
        auto out = F.mode(n);
        for (std::size_t j = 0; j < v.size(); ++j) out[j] = -g2 * v[j];
    }
    return F;
}

/// lambda = 2u + u_xx and its time derivative.  The lift enters lambda as
/// 2 * lift, outside the modal part.
struct LambdaSeries {
    ModalSeries lambda;
    ModalSeries lambda_t;
    double lift_factor = 2.0;
};

inline LambdaSeries compute_lambda(const ReducedSolution& sol) {
    LambdaSeries out{ModalSeries(sol.grid(), sol.modal.n_modes), ModalSeries(sol.grid(), sol.modal.n_modes), 2.0};
    for (int n = 1; n <= sol.modal.n_modes; ++n) {
        const double g2 = sol.cfg.gamma(n) * sol.cfg.gamma(n);
        const auto u = sol.modal.mode(n);
        const auto v = sol.velocity.mode(n);
        auto lam = out.lambda.mode(n);
        auto lam_t = out.lambda_t.mode(n);
        for (std::size_t j = 0; j < u.size(); ++j) {
            lam[j] = (2.0 - g2) * u[j];
            lam_t[j] = (2.0 - g2) * v[j];
        }
    }
    return out;
}

/// The two ways of splitting the perturbed solution.
enum class Decomposition {
    additive_eps_r,  ///< u_eps = u0 + eps r, with L_eps r = -F
    exp_decay_w,     ///< w = e^{-eps t} u + r, with L_eps r = f(x, t, eps)
};

inline const char* to_string(Decomposition d) noexcept {
    return d == Decomposition::additive_eps_r ? "additive_eps_r" : "exp_decay_w";
}

/// Right-hand side s of the error problem  d_xx(eps r_t + c^2 r) - r_tt = s,
/// r = 0 initially and on the boundary, tagged with the decomposition it serves.
struct ErrorSource {
    ModalSeries series;
    Decomposition decomposition = Decomposition::exp_decay_w;
};

/// Source of the additive decomposition: s = -F.
inline ErrorSource additive_error_source(const ModalSeries& F) {
    ErrorSource out{F, Decomposition::additive_eps_r};
    for (int n = 1; n <= F.n_modes; ++n)
        for (double& v : out.series.mode(n)) v = -v;
    return out;
}

/// f(x,t,eps) = F (1 - e^{-eps t}) + e^{-eps t} [ -eps lambda_t + eps^2 (u + u_xx) ],
/// with (u + u_xx)_n = (1 - gamma_n^2) u_n.  A nonzero lift contributes its (slowly
/// converging) sine coefficients to u + u_xx; the tail bound is then infinite.
inline ErrorSource assemble_error_source(const ReducedSolution& sol, const ModalSeries& F,
                                         const LambdaSeries& lam, const ProblemConfig& cfg) {
    const Grid& grid = sol.grid();
    if (!(F.grid == grid) || !(lam.lambda_t.grid == grid))
        detail::fail("assemble_error_source: inputs live on different grids");
    ErrorSource out{ModalSeries(grid, sol.modal.n_modes), Decomposition::exp_decay_w};
    const double eps = cfg.eps;
    for (int n = 1; n <= sol.modal.n_modes; ++n) {
        const double g2 = cfg.gamma(n) * cfg.gamma(n);
        const double lift_n = sol.has_lift() ? lift_coefficient(n, sol.psi0, sol.psi1) : 0.0;
        const auto fF = F.mode(n);
        const auto lt = lam.lambda_t.mode(n);
        const auto u = sol.modal.mode(n);
        auto s = out.series.mode(n);
        for (int j = 0; j < grid.nt; ++j) {
            const double t = grid.t(j);
            const double decay = std::exp(-eps * t);
            s[j] = fF[j] * (-std::expm1(-eps * t)) +
                   decay * (-eps * lt[j] + eps * eps * ((1.0 - g2) * u[j] + lift_n));
        }
    }
    out.series.tail_bound = sol.has_lift() ? std::numeric_limits<double>::infinity() : sol.modal.tail_bound;
    return out;
}

/// A = max{ sup|F|, sup|lambda - u|, sup|lambda_t| } sampled on the grid.
inline double sup_bound_A(const ModalSeries& F, const LambdaSeries& lam, const ReducedSolution& sol) {
    const double l = sol.cfg.l;
    ModalSeries sum_u(sol.grid(), sol.modal.n_modes);  // u + u_xx = lambda - u
    for (int n = 1; n <= sol.modal.n_modes; ++n) {
        const double g2 = sol.cfg.gamma(n) * sol.cfg.gamma(n);
        const auto u = sol.modal.mode(n);
        auto out = sum_u.mode(n);
        for (std::size_t j = 0; j < u.size(); ++j) out[j] = (1.0 - g2) * u[j];
    }
    Field lam_minus_u = synthesize(sum_u);
    if (sol.has_lift())
        for (int i = 0; i < lam_minus_u.grid.nx; ++i) {
            const double v = sol.lift(lam_minus_u.grid.x(i, l));
            for (int j = 0; j < lam_minus_u.grid.nt; ++j) lam_minus_u(i, j) += v;
        }
    return std::max({synthesize(F).max_abs(), lam_minus_u.max_abs(), synthesize(lam.lambda_t).max_abs()});
}

}  // namespace layerlab

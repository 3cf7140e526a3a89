#pragma once

// Finite-difference solver for  u_tt = c^2 u_xx + eps u_xxt + f,  used as an
// independent check on the spectral pipeline.

#include <cmath>
#include <vector>

#include "layerlab/core.hpp"
#include "layerlab/reduced_wave.hpp"

namespace layerlab {

struct FdScheme {
    double dx = 0.0;
    double dt = 0.0;
    double theta = 0.5;  ///< weight of the mixed term; centred

    static FdScheme for_grid(const Grid& grid, const ProblemConfig& cfg) { return {grid.dx(cfg.l), grid.dt(), 0.5}; }
};

inline void validate_scheme(const FdScheme& s, const ProblemConfig& cfg, const Grid& grid) {
    if (!(s.dx > 0.0) || !(s.dt > 0.0)) detail::fail("fd scheme needs dx, dt > 0, got dx = ", s.dx, ", dt = ", s.dt);
    if (s.theta != 0.5) detail::fail("fd scheme supports only the centred mixed term (theta = 1/2), got ", s.theta);
    if (std::abs(s.dx - grid.dx(cfg.l)) > 1e-12 * s.dx || std::abs(s.dt - grid.dt()) > 1e-12 * s.dt)
        detail::fail("fd scheme spacings (dx = ", s.dx, ", dt = ", s.dt, ") do not match the grid (dx = ",
                     grid.dx(cfg.l), ", dt = ", grid.dt(), ")");
    const double cfl = cfg.c * s.dt / s.dx;
    if (cfl > 1.0 + 1e-12) detail::fail("CFL violation: c dt / dx = ", cfl, " > 1");
}

namespace detail {

/// Thomas algorithm for a constant symmetric tridiagonal matrix (diag, off),
/// factored once.
class ConstTridiagonal {
public:
    ConstTridiagonal(std::size_t n, double diag, double off) : off_(off), inv_(n), c_(n) {
        if (!(std::abs(diag) > 2.0 * std::abs(off)))
            fail("tridiagonal system is not strictly diagonally dominant: diag = ", diag, ", off = ", off);
        double prev_c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double denom = diag - off * prev_c;
            inv_[i] = 1.0 / denom;
            c_[i] = off * inv_[i];
            prev_c = c_[i];
        }
    }

    void solve(std::vector<double>& d) const {
        const std::size_t n = d.size();
        d[0] *= inv_[0];
        for (std::size_t i = 1; i < n; ++i) d[i] = (d[i] - off_ * d[i - 1]) * inv_[i];
        for (std::size_t i = n - 1; i-- > 0;) d[i] -= c_[i] * d[i + 1];
    }

private:
    double off_;
    std::vector<double> inv_;
    std::vector<double> c_;
};

}  // namespace detail

/// Centred scheme: (u^{m+1} - 2u^m + u^{m-1})/dt^2 = c^2 D u^m + eps D (u^{m+1} - u^{m-1})/(2 dt) + f^m,
/// with D the three-point Laplacian and Dirichlet values imposed at both ends.
/// The first step is a second-order Taylor start with u_tt(0) taken from the PDE.
inline Field fd_solve(const IbcData& data, const ProblemConfig& cfg, const FdScheme& scheme, const Grid& grid) {
    // eps = 0 is admitted here: the scheme then reduces to the leapfrog wave solver.
    validate_problem(cfg.eps == 0.0 ? cfg.with_eps(1.0) : cfg);
    validate_grid(grid);
    validate_scheme(scheme, cfg, grid);
    check_compatibility(data, cfg);

    const int nx = grid.nx, nt = grid.nt;
    const double dx = scheme.dx, dt = scheme.dt;
    const double c2 = cfg.c * cfg.c, eps = cfg.eps;
    const double inv_dx2 = 1.0 / (dx * dx);
    Field u(grid);
    const auto xs = [&](int i) { return i == nx - 1 ? cfg.l : grid.x(i, cfg.l); };
    const auto src = [&](int i, double t) { return data.source ? data.source(xs(i), t) : 0.0; };

    std::vector<double> u_prev(nx), u_cur(nx), v0(nx, 0.0);
    for (int i = 0; i < nx; ++i) {
        u_prev[i] = data.f0(xs(i));
        if (data.f1) v0[i] = data.f1(xs(i));
    }
    u_prev.front() = data.psi0;
    u_prev.back() = data.psi1;
    const auto lap = [&](const std::vector<double>& v, int i) { return (v[i - 1] - 2.0 * v[i] + v[i + 1]) * inv_dx2; };

    u_cur.front() = data.psi0;
    u_cur.back() = data.psi1;
    for (int i = 1; i < nx - 1; ++i) {
        const double utt = c2 * lap(u_prev, i) + eps * lap(v0, i) + src(i, 0.0);
        u_cur[i] = u_prev[i] + dt * v0[i] + 0.5 * dt * dt * utt;
    }
    for (int i = 0; i < nx; ++i) {
        u(i, 0) = u_prev[i];
        if (nt > 1) u(i, 1) = u_cur[i];
    }

    const double mu = eps * dt / 2.0;
    const std::size_t n_int = static_cast<std::size_t>(nx - 2);
    const detail::ConstTridiagonal system(n_int, 1.0 + 2.0 * mu * inv_dx2, -mu * inv_dx2);
    std::vector<double> rhs(n_int), u_next(nx);
    for (int m = 1; m + 1 < nt; ++m) {
        const double t = grid.t(m);
        for (int i = 1; i < nx - 1; ++i) {
            rhs[i - 1] = 2.0 * u_cur[i] - u_prev[i] + dt * dt * c2 * lap(u_cur, i) - mu * lap(u_prev, i) +
                         dt * dt * src(i, t);
        }
        // Dirichlet values of u^{m+1} moved to the right-hand side.
        rhs.front() += mu * inv_dx2 * data.psi0;
        rhs.back() += mu * inv_dx2 * data.psi1;
        system.solve(rhs);
        u_next.front() = data.psi0;
        u_next.back() = data.psi1;
        for (int i = 1; i < nx - 1; ++i) u_next[i] = rhs[i - 1];
        for (int i = 0; i < nx; ++i) u(i, m + 1) = u_next[i];
        std::swap(u_prev, u_cur);
        std::swap(u_cur, u_next);
    }
    return u;
}

/// Discrete energy at half steps,
///   E^{m+1/2} = 1/2 sum_i ((u_i^{m+1} - u_i^m)/dt)^2 dx
///             + c^2/2 sum_i (D+ u^{m+1})_i (D+ u^m)_i dx,
/// the quantity the centred scheme conserves for eps = 0 and dissipates for eps > 0.
inline std::vector<double> fd_energy(const Field& u, const ProblemConfig& cfg) {
    const Grid& g = u.grid;
    const double dx = g.dx(cfg.l), dt = g.dt(), c2 = cfg.c * cfg.c;
    std::vector<double> e;
    e.reserve(static_cast<std::size_t>(g.nt > 0 ? g.nt - 1 : 0));
    for (int m = 0; m + 1 < g.nt; ++m) {
        CompensatedSum kinetic, potential;
        for (int i = 0; i < g.nx; ++i) {
            const double v = (u(i, m + 1) - u(i, m)) / dt;
            kinetic.add(v * v);
        }
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double a = (u(i + 1, m + 1) - u(i, m + 1)) / dx;
            const double b = (u(i + 1, m) - u(i, m)) / dx;
            potential.add(a * b);
        }
        e.push_back(0.5 * dx * (kinetic.value() + c2 * potential.value()));
    }
    return e;
}

}  // namespace layerlab

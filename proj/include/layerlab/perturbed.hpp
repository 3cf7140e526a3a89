#pragma once

// Error term of the perturbed problem by modal Duhamel convolution against H_n,
// and assembly of the two asymptotic decompositions.

#include <cmath>
#include <span>
#include <vector>

#include "layerlab/core.hpp"
#include "layerlab/green.hpp"
#include "layerlab/reduced_wave.hpp"

namespace layerlab {

struct PerturbedSolution {
    ModalSeries r_modal;
    Decomposition decomposition = Decomposition::exp_decay_w;
};

/// r_n(t_j) = -int_0^{t_j} f_n(tau) H_n(t_j - tau) dtau.
///
/// Sine orthogonality turns the space-time convolution with G into this 1D
/// convolution per mode; the (2/l)(l/2) factor is exactly 1.
inline std::vector<double> modal_convolution(std::span<const double> f_n, int n, const ProblemConfig& cfg,
                                             const Grid& grid) {
    if (static_cast<int>(f_n.size()) != grid.nt)
        detail::fail("modal_convolution: series has ", f_n.size(), " samples, grid has nt = ", grid.nt);
    const ModalAmplitude m = classify_mode(n, cfg);
    const double k = cfg.k(), dt = grid.dt();
    auto r = running_convolution(f_n, dt, [&](double s) { return detail::modal_response(m, k, s); });
    for (double& v : r) v = -v;
    return r;
}

/// Solves  d_xx(eps r_t + c^2 r) - r_tt = source  with zero initial and boundary data.
inline PerturbedSolution solve_error_term(const ErrorSource& source, const ProblemConfig& cfg, const Grid& grid) {
    validate_problem(cfg);
    if (!(source.series.grid == grid))
        detail::fail("solve_error_term: source grid (", source.series.grid.nx, " x ", source.series.grid.nt,
                     ", T = ", source.series.grid.t_max, ") does not match requested grid (", grid.nx, " x ",
                     grid.nt, ", T = ", grid.t_max, ")");
    PerturbedSolution out{ModalSeries(grid, source.series.n_modes), source.decomposition};
    for (int n = 1; n <= source.series.n_modes; ++n) {
        const auto f = source.series.mode(n);
        bool zero = true;
        for (double v : f) zero = zero && v == 0.0;
        if (zero) continue;
        const auto r = modal_convolution(f, n, cfg, grid);
        std::copy(r.begin(), r.end(), out.r_modal.mode(n).begin());
    }
    out.r_modal.tail_bound = source.series.tail_bound;
    return out;
}

/// additive_eps_r: u0 + eps r.   exp_decay_w: e^{-eps t} u + r.
inline Field assemble_solution(const ReducedSolution& u0, const PerturbedSolution& r, const ProblemConfig& cfg,
                               Decomposition tag) {
    if (r.decomposition != tag)
        detail::fail("assemble_solution: error term was built for ", to_string(r.decomposition),
                     " but assembly requested ", to_string(tag));
    if (!(r.r_modal.grid == u0.grid())) detail::fail("assemble_solution: reduced solution and r use different grids");
    Field out = u0.field();
    const Field rf = synthesize(r.r_modal);
    const Grid& g = out.grid;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nt; ++j) {
            if (tag == Decomposition::additive_eps_r)
                out(i, j) += cfg.eps * rf(i, j);
            else
                out(i, j) = std::exp(-cfg.eps * g.t(j)) * out(i, j) + rf(i, j);
        }
    return out;
}

/// Everything the perturbed pipeline produces for one eps and one decomposition.
struct PerturbedRun {
    ReducedSolution reduced;
    PerturbedSolution error;
    Field r;
    Field assembled;
};

inline PerturbedRun run_perturbed(const IbcData& data, const ProblemConfig& cfg, const Grid& grid, int n_modes,
                                  Decomposition tag) {
    PerturbedRun out;
    out.reduced = solve_reduced(data, cfg, grid, n_modes);
    const ModalSeries F = compute_F(out.reduced);
    ErrorSource src;
    if (tag == Decomposition::additive_eps_r) {
        src = additive_error_source(F);
    } else {
        src = assemble_error_source(out.reduced, F, compute_lambda(out.reduced), cfg);
    }
    out.error = solve_error_term(src, cfg, grid);
    out.r = synthesize(out.error.r_modal);
    out.assembled = assemble_solution(out.reduced, out.error, cfg, tag);
    return out;
}

}  // namespace layerlab

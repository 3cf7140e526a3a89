#include <gtest/gtest.h>

#include <cmath>

#include "layerlab/reduced_wave.hpp"

using namespace layerlab;

namespace {

IbcData zero_data() {
    IbcData d;
    d.f0 = [](double) { return 0.0; };
    d.f1 = [](double) { return 0.0; };
    return d;
}

IbcData forced_data(const ProblemConfig& cfg) {
    IbcData d = zero_data();
    const double g = cfg.gamma(1);
    d.source = [=](double x, double) { return std::sin(g * x); };
    return d;
}

}  // namespace

TEST(SolveReduced, StandingWaveIsExact) {
    const ProblemConfig cfg{2.0, 1.3, 0.1};
    const Grid grid{41, 101, 3.0};
    const auto sol = solve_reduced(standing_wave(cfg), cfg, grid, 16);
    const Field u = sol.field();
    const double g = cfg.gamma(1);
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.nt; ++j)
            EXPECT_NEAR(u(i, j), std::cos(g * cfg.c * grid.t(j)) * std::sin(g * grid.x(i, cfg.l)), 1e-12);
    EXPECT_LT(sol.modal.tail_bound, 1e-12);
}

TEST(SolveReduced, ZeroDataGiveZeroField) {
    const ProblemConfig cfg{pi, 1.0, 0.1};
    const auto sol = solve_reduced(zero_data(), cfg, {21, 21, 1.0}, 8);
    EXPECT_EQ(sol.field().max_abs(), 0.0);
}

TEST(SolveReduced, ConstantSourceMatchesClosedFormDuhamel) {
    const ProblemConfig cfg{pi, 1.0, 0.1};
    const Grid grid{41, 401, 5.0};
    const auto sol = solve_reduced(forced_data(cfg), cfg, grid, 8);
    const double g = cfg.gamma(1), c = cfg.c;
    for (int j = 0; j < grid.nt; ++j) {
        const double t = grid.t(j);
        EXPECT_NEAR(sol.modal.coeffs(0, j), (1.0 - std::cos(g * c * t)) / (c * c * g * g), 1e-9) << "t=" << t;
        EXPECT_NEAR(sol.velocity.coeffs(0, j), std::sin(g * c * t) / (c * g), 1e-9);
        for (int n = 2; n <= 8; ++n) EXPECT_NEAR(sol.modal.coeffs(n - 1, j), 0.0, 1e-12);
    }
}

TEST(SolveReduced, SineCubedProjectsOntoTwoModes) {
    const ProblemConfig cfg{pi, 1.0, 0.1};
    IbcData d = zero_data();
    d.f0 = [](double x) { return std::pow(std::sin(x), 3); };
    const auto sol = solve_reduced(d, cfg, {101, 2, 1.0}, 10);
    EXPECT_NEAR(sol.modal.coeffs(0, 0), 0.75, 1e-12);
    EXPECT_NEAR(sol.modal.coeffs(2, 0), -0.25, 1e-12);
    for (int n : {2, 4, 5, 6, 7, 8, 9, 10}) EXPECT_NEAR(sol.modal.coeffs(n - 1, 0), 0.0, 1e-12);
}

TEST(SolveReduced, BoundaryLiftCarriesInhomogeneousDirichletData) {
    const ProblemConfig cfg{2.0, 1.0, 0.1};
    IbcData d = zero_data();
    d.psi0 = 1.0;
    d.psi1 = -0.5;
    d.f0 = [&](double x) { return 1.0 - 1.5 * x / cfg.l; };
    const auto sol = solve_reduced(d, cfg, {21, 11, 1.0}, 12);
    const Field u = sol.field();
    for (int i = 0; i < 21; ++i)
        for (int j = 0; j < 11; ++j) EXPECT_NEAR(u(i, j), 1.0 - 1.5 * sol.grid().x(i, cfg.l) / cfg.l, 1e-12);
    // Lift sine coefficients agree with direct quadrature of psi0 + (psi1 - psi0) x / l.
    for (int n = 1; n <= 5; ++n) {
        double s = 0.0;
        const int m = 20000;
        for (int i = 0; i < m; ++i) {
            const double x = cfg.l * (i + 0.5) / m;
            s += (1.0 - 1.5 * x / cfg.l) * std::sin(cfg.gamma(n) * x);
        }
        EXPECT_NEAR(lift_coefficient(n, 1.0, -0.5), 2.0 / cfg.l * s * cfg.l / m, 1e-7);
    }
}

TEST(SolveReduced, ReportsIncompatibleDataWithMagnitude) {
    const ProblemConfig cfg{pi, 1.0, 0.1};
    IbcData d = zero_data();
    d.f0 = [](double) { return 0.25; };
    try {
        solve_reduced(d, cfg, {21, 11, 1.0}, 4);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("0.25"), std::string::npos);
    }
    EXPECT_THROW(solve_reduced(zero_data(), cfg, {21, 11, 1.0}, 0), DomainError);
}

TEST(ComputeF, StandingWave) {
    const ProblemConfig cfg{2.0, 1.3, 0.1};
    const Grid grid{41, 81, 2.0};
    const auto sol = solve_reduced(standing_wave(cfg), cfg, grid, 8);
    const ModalSeries F = compute_F(sol);
    const double g = cfg.gamma(1);
    for (int j = 0; j < grid.nt; ++j)
        EXPECT_NEAR(F.coeffs(0, j), g * g * g * cfg.c * std::sin(g * cfg.c * grid.t(j)), 1e-11);
    EXPECT_EQ(synthesize(compute_F(solve_reduced(zero_data(), cfg, grid, 8))).max_abs(), 0.0);
}

TEST(ComputeF, DuhamelCaseMatchesFiniteDifferencesOfTheField) {
    const ProblemConfig cfg{pi, 1.0, 0.1};
    const Grid grid{201, 801, 4.0};
    const auto sol = solve_reduced(forced_data(cfg), cfg, grid, 4);
    const Field u = sol.field();
    const Field F = synthesize(compute_F(sol));
    const double dx = grid.dx(cfg.l), dt = grid.dt();
    double err = 0.0;
    for (int i = 1; i + 1 < grid.nx; i += 5)
        for (int j = 1; j + 1 < grid.nt; j += 7) {
            auto uxx = [&](int jj) { return (u(i - 1, jj) - 2 * u(i, jj) + u(i + 1, jj)) / (dx * dx); };
            const double fd = (uxx(j + 1) - uxx(j - 1)) / (2 * dt);
            err = std::max(err, std::abs(fd - F(i, j)));
        }
    EXPECT_LT(err, 1e-4);
}

TEST(ComputeLambda, StandingWaveOnUnitModeGivesU) {
    const ProblemConfig cfg{pi, 1.0, 0.1};
    const Grid grid{21, 41, 2.0};
    const auto sol = solve_reduced(standing_wave(cfg), cfg, grid, 4);
    const Field lam = synthesize(compute_lambda(sol).lambda);
    const Field u = sol.field();
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.nt; ++j) EXPECT_NEAR(lam(i, j), u(i, j), 1e-13);
    const auto z = compute_lambda(solve_reduced(zero_data(), cfg, grid, 4));
    EXPECT_EQ(synthesize(z.lambda).max_abs(), 0.0);
    EXPECT_EQ(synthesize(z.lambda_t).max_abs(), 0.0);
}

TEST(ComputeLambda, MatchesFiniteDifferenceOfArbitraryModalData) {
    const ProblemConfig cfg{2.0, 1.0, 0.1};
    IbcData d = zero_data();
    d.f0 = [&](double x) { return std::sin(cfg.gamma(1) * x) + 0.3 * std::sin(cfg.gamma(3) * x) - 0.1 * std::sin(cfg.gamma(4) * x); };
    d.f1 = [&](double x) { return 0.5 * std::sin(cfg.gamma(2) * x); };
    std::vector<double> errs;
    for (int nx : {51, 101}) {
        const Grid grid{nx, 11, 1.0};
        const auto sol = solve_reduced(d, cfg, grid, 8);
        const Field u = sol.field();
        const Field lam = synthesize(compute_lambda(sol).lambda);
        const double dx = grid.dx(cfg.l);
        double e = 0.0;
        for (int i = 1; i + 1 < nx; ++i)
            for (int j = 0; j < grid.nt; ++j) {
                const double fd = 2 * u(i, j) + (u(i - 1, j) - 2 * u(i, j) + u(i + 1, j)) / (dx * dx);
                e = std::max(e, std::abs(fd - lam(i, j)));
            }
        errs.push_back(e);
    }
    EXPECT_NEAR(std::log2(errs[0] / errs[1]), 2.0, 0.1);
}

TEST(ErrorSource, InitialValueAndSmallEpsLimit) {
    const ProblemConfig cfg{2.0, 1.0, 0.1};
    IbcData d = zero_data();
    d.f0 = [&](double x) { return std::sin(cfg.gamma(1) * x) + 0.2 * std::sin(cfg.gamma(2) * x); };
    d.f1 = [&](double x) { return 0.4 * std::sin(cfg.gamma(1) * x); };
    const Grid grid{31, 21, 1.0};
    for (double eps : {0.1, 1e-3, 1e-6}) {
        const ProblemConfig c = cfg.with_eps(eps);
        const auto sol = solve_reduced(d, c, grid, 6);
        const auto lam = compute_lambda(sol);
        const auto src = assemble_error_source(sol, compute_F(sol), lam, c);
        EXPECT_EQ(src.decomposition, Decomposition::exp_decay_w);
        const Field f = synthesize(src.series);
        const Field lt = synthesize(lam.lambda_t);
        const Field uu = synthesize(lam.lambda);  // 2u + u_xx
        const Field u = sol.field();
        for (int i = 0; i < grid.nx; ++i) {
            const double expect = -eps * lt(i, 0) + eps * eps * (uu(i, 0) - u(i, 0));
            EXPECT_NEAR(f(i, 0), expect, 1e-13);
        }
        EXPECT_LT(f.max_abs(), 200.0 * eps);
    }
}

TEST(ErrorSource, MatchesDirectGridEvaluation) {
    // f evaluated from the sampled fields F, lambda_t and u + u_xx on the grid.
    const ProblemConfig cfg{pi, 1.0, 0.1};
    const Grid grid{51, 201, 4.0};
    const auto sol = solve_reduced(forced_data(cfg), cfg, grid, 6);
    const ModalSeries F = compute_F(sol);
    const auto lam = compute_lambda(sol);
    const Field f = synthesize(assemble_error_source(sol, F, lam, cfg).series);
    const Field Ff = synthesize(F), lt = synthesize(lam.lambda_t), lv = synthesize(lam.lambda), u = sol.field();
    for (int i = 0; i < grid.nx; i += 5)
        for (int j = 0; j < grid.nt; j += 10) {
            const double t = grid.t(j), e = cfg.eps;
            const double direct = Ff(i, j) * (1 - std::exp(-e * t)) +
                                  std::exp(-e * t) * (-e * lt(i, j) + e * e * (lv(i, j) - u(i, j)));
            EXPECT_NEAR(f(i, j), direct, 1e-13);
        }
    const auto add = additive_error_source(F);
    EXPECT_EQ(add.decomposition, Decomposition::additive_eps_r);
    EXPECT_EQ(add.series.coeffs(0, 37), -F.coeffs(0, 37));
}

TEST(SupBoundA, ZeroAndStandingWave) {
    const ProblemConfig cfg{pi, 1.0, 0.1};
    const Grid zgrid{21, 21, 1.0};
    const auto z = solve_reduced(zero_data(), cfg, zgrid, 4);
    EXPECT_EQ(sup_bound_A(compute_F(z), compute_lambda(z), z), 0.0);
    // t_max = 2 pi with nt = 401 samples t = pi/2, where |sin t| peaks.
    const Grid grid{201, 401, 2.0 * pi};
    const auto sol = solve_reduced(standing_wave(cfg), cfg, grid, 8);
    EXPECT_NEAR(sup_bound_A(compute_F(sol), compute_lambda(sol), sol), 1.0, 1e-12);
}

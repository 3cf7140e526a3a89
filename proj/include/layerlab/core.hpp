#pragma once

// Shared domain types for the strip problem of the pseudo-parabolic operator
//   L_eps = d_xx (eps d_t + c^2) - d_tt   on  [0, l] x [0, T].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace layerlab {

inline constexpr double pi = std::numbers::pi;
inline constexpr double zeta2 = pi * pi / 6.0;

/// Raised when an input violates a stated invariant.  The message names the
/// invariant and the offending value.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

template <typename... Parts>
[[noreturn]] void fail(const Parts&... parts) {
    std::ostringstream os;
    os.precision(17);
    (os << ... << parts);
    throw DomainError(os.str());
}

/// sin(pi r) with exact zeros at integer r.
inline double sin_pi(double r) noexcept {
    r = std::fmod(r, 2.0);
    if (r < 0.0) r += 2.0;
    double sign = 1.0;
    if (r >= 1.0) {
        r -= 1.0;
        sign = -1.0;
    }
    if (r == 0.0) return 0.0;
    return sign * std::sin(pi * (r <= 0.5 ? r : 1.0 - r));
}

/// sin(gamma_n x) = sin(pi n x / l).
inline double mode_shape(long long n, double x, double l) noexcept {
    return sin_pi(static_cast<double>(n) * (x / l));
}

/// sin(gamma_n x_i) on a uniform grid of nx points, phase reduced exactly.
inline double grid_mode_shape(long long n, long long i, long long nx) noexcept {
    const long long period = 2 * (nx - 1);
    const long long m = (n % period) * i % period;
    return sin_pi(static_cast<double>(m) / static_cast<double>(nx - 1));
}

}  // namespace detail

/// Physical parameters of the strip problem.
struct ProblemConfig {
    double l = pi;     ///< strip width
    double c = 1.0;    ///< wave speed
    double eps = 0.1;  ///< perturbation (viscosity) parameter

    [[nodiscard]] double q() const noexcept { return pi * pi / (2.0 * l * l); }
    [[nodiscard]] double b() const noexcept { return q() * eps; }
    /// Mode threshold 2cl/(pi eps) separating oscillatory and monotone modes.
    [[nodiscard]] double k() const noexcept { return 2.0 * c * l / (pi * eps); }
    [[nodiscard]] double gamma(int n) const noexcept { return pi * n / l; }
    /// Modal damping rate a_n = b n^2 = (eps/2) gamma_n^2.
    [[nodiscard]] double damping(int n) const noexcept {
        const double nn = static_cast<double>(n);
        return b() * nn * nn;
    }

    [[nodiscard]] ProblemConfig with_eps(double e) const noexcept {
        ProblemConfig out = *this;
        out.eps = e;
        return out;
    }
};

/// Exponents of the mode-split analysis and of the error estimate.
///
/// `beta` is the threshold offset used when splitting the oscillatory block;
/// `beta4()` is the unrelated derived exponent delta (2 alpha - 1) - 1/2.
struct ExponentParams {
    double alpha = 0.8;
    double beta = 0.5;
    double delta = 0.9;
    double gamma = 0.5;

    [[nodiscard]] double beta4() const noexcept { return delta * (2.0 * alpha - 1.0) - 0.5; }
    [[nodiscard]] double eta() const noexcept {
        double e = beta4();
        e = std::min(e, gamma);
        e = std::min(e, 1.0 - alpha);
        return std::min(e, 0.5);
    }
};

/// Which part of the analysis the exponents must support.  The Green-function
/// envelope needs only alpha in (1/2, 1); the error estimate needs the full set.
enum class AnalysisStage { green_envelope, error_estimate };

struct ValidatedConfig {
    ProblemConfig problem;
    ExponentParams exponents;
    double q = 0.0;
    double b = 0.0;
    double k = 0.0;
    double beta4 = 0.0;
    double eta = 0.0;
};

inline void validate_problem(const ProblemConfig& cfg) {
    if (!(cfg.l > 0.0) || !std::isfinite(cfg.l)) detail::fail("problem.l must be > 0, got ", cfg.l);
    if (!(cfg.c > 0.0) || !std::isfinite(cfg.c)) detail::fail("problem.c must be > 0, got ", cfg.c);
    if (!(cfg.eps > 0.0) || !std::isfinite(cfg.eps)) detail::fail("problem.eps must be > 0, got ", cfg.eps);
}

inline ValidatedConfig validate_config(const ProblemConfig& cfg, const ExponentParams& exps,
                                       AnalysisStage stage = AnalysisStage::error_estimate) {
    validate_problem(cfg);
    const double a = exps.alpha;
    if (!(a > 0.5 && a < 1.0)) detail::fail("alpha must satisfy 1/2 < alpha < 1, got ", a);
    if (!(exps.beta > 0.0 && exps.beta < 1.0)) detail::fail("beta must satisfy 0 < beta < 1, got ", exps.beta);
    if (stage == AnalysisStage::error_estimate) {
        if (!(a > 0.75)) detail::fail("alpha must satisfy 3/4 < alpha < 1 for the error estimate, got ", a);
        if (!(exps.gamma > 0.0 && exps.gamma < 1.0))
            detail::fail("gamma must satisfy 0 < gamma < 1, got ", exps.gamma);
        const double delta_min = 1.0 / (2.0 * (2.0 * a - 1.0));
        if (!(exps.delta > delta_min && exps.delta < 1.0))
            detail::fail("delta must satisfy 1/(2(2 alpha - 1)) = ", delta_min, " < delta < 1, got ", exps.delta);
        if (!(exps.beta4() > 0.0)) detail::fail("delta (2 alpha - 1) - 1/2 must be > 0, got ", exps.beta4());
    }
    ValidatedConfig v{cfg, exps, cfg.q(), cfg.b(), cfg.k(), exps.beta4(), exps.eta()};
    return v;
}

/// Mode threshold k = 2cl/(pi eps).
inline double mode_threshold(const ProblemConfig& cfg) {
    validate_problem(cfg);
    return cfg.k();
}

/// Uniform space-time grid on [0, l] x [0, t_max], endpoints included.
struct Grid {
    int nx = 201;
    int nt = 401;
    double t_max = 5.0;

    [[nodiscard]] double dx(double l) const noexcept { return l / (nx - 1); }
    [[nodiscard]] double dt() const noexcept { return t_max / (nt - 1); }
    [[nodiscard]] double x(int i, double l) const noexcept { return l * i / (nx - 1); }
    [[nodiscard]] double t(int j) const noexcept { return t_max * j / (nt - 1); }

    friend bool operator==(const Grid&, const Grid&) = default;
};

inline void validate_grid(const Grid& g) {
    if (g.nx < 3) detail::fail("grid.nx must be >= 3, got ", g.nx);
    if (g.nt < 2) detail::fail("grid.nt must be >= 2, got ", g.nt);
    if (!(g.t_max > 0.0) || !std::isfinite(g.t_max)) detail::fail("grid.t_max must be > 0, got ", g.t_max);
}

/// Dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Samples of a scalar function on a grid; values(i, j) is the value at (x_i, t_j).
struct Field {
    Grid grid;
    Matrix values;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), values(static_cast<std::size_t>(g.nx), static_cast<std::size_t>(g.nt)) {}

    double& operator()(int i, int j) noexcept { return values(i, j); }
    double operator()(int i, int j) const noexcept { return values(i, j); }

    [[nodiscard]] double max_abs() const noexcept {
        double m = 0.0;
        for (double v : values.data()) m = std::max(m, std::abs(v));
        return m;
    }
    [[nodiscard]] bool all_finite() const noexcept {
        for (double v : values.data())
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Sine-series coefficients coeffs(n-1, j) of a field at times t_j, together
/// with a bound on what the truncation to n_modes discards.
struct ModalSeries {
    Grid grid;
    int n_modes = 0;
    Matrix coeffs;
    double tail_bound = 0.0;

    ModalSeries() = default;
    ModalSeries(const Grid& g, int modes)
        : grid(g), n_modes(modes), coeffs(static_cast<std::size_t>(modes), static_cast<std::size_t>(g.nt)) {}

    [[nodiscard]] std::span<const double> mode(int n) const noexcept { return coeffs.row(n - 1); }
    [[nodiscard]] std::span<double> mode(int n) noexcept { return coeffs.row(n - 1); }

    /// Value of the truncated series at (x, t_j).
    [[nodiscard]] double evaluate(double x, int j, double l) const {
        double s = 0.0;
        for (int n = 1; n <= n_modes; ++n) s += coeffs(n - 1, j) * detail::mode_shape(n, x, l);
        return s;
    }
};

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Sine-table synthesis of a modal series on its grid.
inline Field synthesize(const ModalSeries& s) {
    Field f(s.grid);
    const int nx = s.grid.nx, nt = s.grid.nt;
    std::vector<double> shape(static_cast<std::size_t>(nx));
    for (int n = 1; n <= s.n_modes; ++n) {
        for (int i = 0; i < nx; ++i) shape[i] = detail::grid_mode_shape(n, i, nx);
        const auto c = s.mode(n);
        for (int i = 0; i < nx; ++i) {
            if (shape[i] == 0.0) continue;
            auto row = f.values.row(static_cast<std::size_t>(i));
            for (int j = 0; j < nt; ++j) row[j] += c[j] * shape[i];
        }
    }
    return f;
}

/// Composite quadrature weights on m uniform panels of width h: Simpson when m is
/// even, Simpson plus a closing 3/8 panel triple when m is odd and >= 3, and the
/// trapezoid rule for m == 1.
inline std::vector<double> composite_weights(int m, double h) {
    std::vector<double> w(static_cast<std::size_t>(m) + 1, 0.0);
    if (m <= 0) return w;
    if (m == 1) {
        w[0] = w[1] = 0.5 * h;
        return w;
    }
    const int simpson_panels = (m % 2 == 0) ? m : m - 3;
    for (int i = 0; i + 2 <= simpson_panels; i += 2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if (m % 2 == 1) {
        const int s = m - 3;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    return w;
}

/// Running convolution  out_j = int_0^{t_j} f(tau) K(t_j - tau) dtau  on a uniform
/// grid, with kernel(s) = K(s) for s >= 0.  Each out_j uses composite_weights
/// over its own j panels.  The single panel of out_1 is split in two Simpson
/// halves, with f at dt/2 taken from the quadratic through f_0, f_1, f_2.
template <typename Kernel>
std::vector<double> running_convolution(std::span<const double> f, double dt, Kernel&& kernel) {
    const int nt = static_cast<int>(f.size());
    std::vector<double> out(f.size(), 0.0);
    if (nt < 2) return out;
    std::vector<double> k_table(static_cast<std::size_t>(nt));
    for (int m = 0; m < nt; ++m) k_table[static_cast<std::size_t>(m)] = kernel(m * dt);
    const auto K = [&](int m) { return k_table[static_cast<std::size_t>(m)]; };

    const double f_half = nt >= 3 ? (3.0 * f[0] + 6.0 * f[1] - f[2]) / 8.0 : 0.5 * (f[0] + f[1]);
    out[1] = dt / 6.0 * (f[0] * K(1) + 4.0 * f_half * kernel(0.5 * dt) + f[1] * K(0));
    for (int j = 2; j < nt; ++j) {
        const std::vector<double> w = composite_weights(j, dt);
        double s = 0.0;
        for (int m = 0; m <= j; ++m) s += w[static_cast<std::size_t>(m)] * f[m] * K(j - m);
        out[static_cast<std::size_t>(j)] = s;
    }
    return out;
}

}  // namespace layerlab

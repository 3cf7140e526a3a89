#pragma once

// Closed-form envelopes for |G| and for the error term r, and the machinery that
// certifies sampled values against them.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "layerlab/core.hpp"
#include "layerlab/green.hpp"
#include "layerlab/io.hpp"

namespace layerlab {

/// Threshold offsets actually used by the mode split.  For integral k the block
/// below the threshold stops at n = k - 1 (offset 1) and the tail starts at
/// n = k + 1 (offset 0); the n = k term is carried separately.
struct SplitOffsets {
    bool integral_k = false;
    double split = 0.5;  ///< enters N_1
    double tail = 0.5;   ///< enters C_1
};

inline SplitOffsets split_offsets(const ProblemConfig& cfg, const ExponentParams& exps) {
    const double k = cfg.k();
    if (std::abs(k - std::round(k)) < 1e-9) return {true, 1.0, 0.0};
    return {false, exps.beta, exps.beta};
}

struct GreenEnvelopeConstants {
    double n_eps = 0.0;
    double n1_eps = 0.0;
    double c1_eps = 0.0;
    double m_eps = 0.0;  ///< max{N_1 eps^{-3/2}, C_1 eps^{-2}}
    SplitOffsets offsets;
};

inline GreenEnvelopeConstants green_envelope_constants(const ProblemConfig& cfg, const ExponentParams& exps) {
    validate_config(cfg, exps, AnalysisStage::green_envelope);
    const double l = cfg.l, c = cfg.c, eps = cfg.eps, q = cfg.q();
    const double layer = std::pow(eps, 2.0 * (1.0 - exps.alpha));
    if (!(layer < 1.0))
        detail::fail("green envelope needs 1 - eps^{2(1-alpha)} > 0, got eps^{2(1-alpha)} = ", layer,
                     " (eps = ", eps, ")");
    const SplitOffsets off = split_offsets(cfg, exps);
    const double bs = off.split;
    const double bt = 1.0 - off.tail;
    const double span_split = 4.0 * c * l - bs * pi * eps;
    const double head_split = 2.0 * c * l - pi * eps * bs;
    if (!(span_split > 0.0 && head_split > 0.0))
        detail::fail("green envelope needs 2cl - pi eps beta > 0, got ", head_split, " (eps = ", eps, ")");

    GreenEnvelopeConstants out;
    out.offsets = off;
    out.n_eps = 2.0 * zeta2 / (q * l) / std::sqrt(1.0 - layer);
    out.n1_eps = 2.0 * zeta2 * head_split / (q * l * std::sqrt(pi * bs) * std::sqrt(span_split));
    out.c1_eps = 2.0 * zeta2 * (c * l + pi * eps * bt) / (q * l * pi * bt * (4.0 * c * l + pi * eps * bt));
    out.m_eps = std::max(out.n1_eps * std::pow(eps, -1.5), out.c1_eps / (eps * eps));
    return out;
}

/// N eps^{-alpha} e^{-q t eps} + M e^{-c^2 t / eps^{2 alpha - 1}}.
inline double green_envelope(double t, const GreenEnvelopeConstants& k, const ProblemConfig& cfg,
                             const ExponentParams& exps) {
    const double eps = cfg.eps;
    return k.n_eps * std::pow(eps, -exps.alpha) * std::exp(-cfg.q() * t * eps) +
           k.m_eps * std::exp(-cfg.c * cfg.c * t / std::pow(eps, 2.0 * exps.alpha - 1.0));
}

struct ErrorEnvelopeConstants {
    double Z = 0.0, Y = 0.0, W = 0.0, V = 0.0, U = 0.0, S = 0.0;
    double A = 0.0;
    double eta = 0.0;
    GreenEnvelopeConstants green;
};

inline ErrorEnvelopeConstants error_envelope_constants(const ProblemConfig& cfg, const ExponentParams& exps,
                                                       double A) {
    const ValidatedConfig v = validate_config(cfg, exps, AnalysisStage::error_estimate);
    if (!(A >= 0.0) || !std::isfinite(A)) detail::fail("sup bound A must be finite and >= 0, got ", A);
    const GreenEnvelopeConstants g = green_envelope_constants(cfg, exps);
    const double c2 = cfg.c * cfg.c, eps = cfg.eps, q = v.q;
    const double delta = exps.delta, gam = exps.gamma;

    ErrorEnvelopeConstants out;
    out.green = g;
    out.A = A;
    out.eta = v.eta;
    out.Z = g.n_eps / 2.0;
    out.Y = std::max(2.0 * g.n_eps, g.n1_eps);
    out.W = g.n1_eps * std::pow(delta / std::numbers::e, delta);
    out.V = g.c1_eps * std::pow((1.0 + gam) / std::numbers::e, 1.0 + gam) / (1.0 - gam);
    out.U = 2.0 * q * eps / c2 * zeta2 + g.c1_eps / c2 + eps / c2;
    out.S = 2.0 * q * eps * zeta2 / c2 + eps / c2;
    return out;
}

/// A l eps^eta {t^2 Z + t Y + (t^{2-delta} + t^{1-delta}) W + t^{1-gamma} V}
///   + A {U e^{-c^2 t/eps} + S}.
inline double error_envelope(double t, const ErrorEnvelopeConstants& k, const ProblemConfig& cfg,
                             const ExponentParams& exps) {
    const double eps = cfg.eps;
    const double d = exps.delta, g = exps.gamma;
    const double poly = t * t * k.Z + t * k.Y + (std::pow(t, 2.0 - d) + std::pow(t, 1.0 - d)) * k.W +
                        std::pow(t, 1.0 - g) * k.V;
    return k.A * cfg.l * std::pow(eps, k.eta) * poly +
           k.A * (k.U * std::exp(-cfg.c * cfg.c * t / eps) + k.S);
}

struct ExpPowerSides {
    double lhs = 0.0;  ///< e^{-x}
    double rhs = 0.0;  ///< (a / (e x))^a
};

/// Both sides of e^{-x} <= (a/(e x))^a.
inline ExpPowerSides exp_power_bound(double a, double x) {
    if (!(a > 0.0)) detail::fail("exp_power_bound requires a > 0, got ", a);
    if (!(x > 0.0)) detail::fail("exp_power_bound requires x > 0, got ", x);
    return {std::exp(-x), std::exp(a * (std::log(a) - 1.0 - std::log(x)))};
}

/// Time horizon eps^{-eta/2} of the region on which r is uniformly bounded.
inline double q_epsilon_horizon(double eps, double eta) {
    if (!(eps > 0.0)) detail::fail("horizon needs eps > 0, got ", eps);
    if (!(eta > 0.0 && eta <= 0.5)) detail::fail("horizon needs 0 < eta <= 1/2, got ", eta);
    return std::pow(eps, -eta / 2.0);
}

inline double q_epsilon_horizon(const ProblemConfig& cfg, const ExponentParams& exps) {
    const ValidatedConfig v = validate_config(cfg, exps, AnalysisStage::error_estimate);
    return q_epsilon_horizon(cfg.eps, v.eta);
}

struct EnvelopeSample {
    double t = 0.0;
    double sampled_max = 0.0;
    double envelope = 0.0;
    double margin_ratio = 0.0;
};

struct EnvelopeReport {
    std::vector<EnvelopeSample> samples;
    bool passed = true;

    void add(double t, double sampled, double envelope, double limit = 1.0) {
        const double ratio = envelope > 0.0 ? sampled / envelope : (sampled > 0.0 ? INFINITY : 0.0);
        samples.push_back({t, sampled, envelope, ratio});
        if (!(ratio <= limit)) passed = false;
    }

    [[nodiscard]] double max_margin() const noexcept {
        double m = 0.0;
        for (const auto& s : samples) m = std::max(m, s.margin_ratio);
        return m;
    }
};

inline void write_csv(std::ostream& os, const EnvelopeReport& report) {
    os << "t,sampled_max,envelope,margin_ratio\n";
    for (const auto& s : report.samples)
        os << fmt17(s.t) << ',' << fmt17(s.sampled_max) << ',' << fmt17(s.envelope) << ','
           << fmt17(s.margin_ratio) << '\n';
}

/// Certifies max_{x, xi} |G| against the Green envelope at each requested time.
/// The tail is truncated at series_tol_rel * envelope(t), and the reported
/// sampled_max is the grid maximum of the truncated series plus its certified
/// tail bound.
inline EnvelopeReport certify_green(const ProblemConfig& cfg, const ExponentParams& exps, int nx,
                                    const std::vector<double>& times, double series_tol_rel = 1e-6,
                                    double limit = 1.0) {
    const GreenEnvelopeConstants consts = green_envelope_constants(cfg, exps);
    GreenGridSampler sampler(cfg, nx);
    EnvelopeReport report;
    for (double t : times) {
        const double env = green_envelope(t, consts, cfg, exps);
        double sampled = 0.0;
        if (t > 0.0) {
            const auto s = sampler.max_abs(t, series_tol_rel * env);
            sampled = s.max_abs + s.tail_bound;
        }
        report.add(t, sampled, env, limit);
    }
    return report;
}

/// Certifies max_x |r(x, t_j)| against the error envelope for every grid time.
inline EnvelopeReport certify_error(const Field& r, const ErrorEnvelopeConstants& consts,
                                    const ProblemConfig& cfg, const ExponentParams& exps,
                                    double limit = 1.0) {
    EnvelopeReport report;
    for (int j = 0; j < r.grid.nt; ++j) {
        double m = 0.0;
        for (int i = 0; i < r.grid.nx; ++i) m = std::max(m, std::abs(r(i, j)));
        const double t = r.grid.t(j);
        report.add(t, m, error_envelope(t, consts, cfg, exps), limit);
    }
    return report;
}

struct InequalityCheck {
    int checked = 0;
    int violations = 0;
    double min_ratio = INFINITY;  ///< smallest lhs/rhs over the checked range (>= 1 when it holds)
};

/// n_bar = 2cl / (pi eps^alpha).
inline double layer_mode_bound(const ProblemConfig& cfg, const ExponentParams& exps) {
    return 2.0 * cfg.c * cfg.l / (pi * std::pow(cfg.eps, exps.alpha));
}

/// For 1 <= n <= floor(n_bar):  sqrt((k/n)^2 - 1) >= sqrt(1 - eps^{2(1-alpha)}) / eps^{1-alpha}
/// and b n^2 >= q eps (so that e^{-b n^2 t} <= e^{-q t eps}).
inline InequalityCheck check_low_mode_bounds(const ProblemConfig& cfg, const ExponentParams& exps) {
    InequalityCheck out;
    const double k = cfg.k(), eps = cfg.eps;
    const double layer = std::pow(eps, 1.0 - exps.alpha);
    const double rhs_root = std::sqrt(1.0 - layer * layer) / layer;
    const int n_top = static_cast<int>(std::floor(layer_mode_bound(cfg, exps)));
    for (int n = 1; n <= n_top; ++n) {
        const double ratio = k / n;
        const double lhs = std::sqrt(ratio * ratio - 1.0);
        ++out.checked;
        out.min_ratio = std::min(out.min_ratio, lhs / rhs_root);
        if (!(lhs >= rhs_root)) ++out.violations;
        const double rate = cfg.damping(n), rate_bound = cfg.q() * eps;
        if (!(rate >= rate_bound)) ++out.violations;
    }
    return out;
}

/// For floor(n_bar) + 1 <= n <= floor(k):  b n^2 >= 2 c^2 / eps^{2 alpha - 1}, i.e.
/// e^{-b n^2 t} <= e^{-2 c^2 t / eps^{2 alpha - 1}} for every t >= 0.
inline InequalityCheck check_layer_mode_decay(const ProblemConfig& cfg, const ExponentParams& exps) {
    InequalityCheck out;
    const double rate_bound = 2.0 * cfg.c * cfg.c / std::pow(cfg.eps, 2.0 * exps.alpha - 1.0);
    const int n_lo = static_cast<int>(std::floor(layer_mode_bound(cfg, exps))) + 1;
    const int n_hi = static_cast<int>(std::floor(cfg.k() + 1e-9));
    for (int n = n_lo; n <= n_hi; ++n) {
        const double rate = cfg.damping(n);
        ++out.checked;
        out.min_ratio = std::min(out.min_ratio, rate / rate_bound);
        if (!(rate >= rate_bound)) ++out.violations;
    }
    return out;
}

}  // namespace layerlab

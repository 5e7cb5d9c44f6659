#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gratlab/errors.hpp"
#include "gratlab/modes.hpp"

namespace gratlab {

/// Quasi-periodic trace on Gamma: v(x1) = sum_n coeffs[n] e^{i alpha_n x1},
/// n = -N..N over a shared ModeSet. Parseval: ||v||^2_{L2(Gamma)} =
/// Lambda sum |coeffs_n|^2.
struct BoundaryTrace {
    std::shared_ptr<const ModeSet> modes;
    Eigen::VectorXcd coeffs;

    static BoundaryTrace zero(std::shared_ptr<const ModeSet> ms) {
        BoundaryTrace t;
        t.coeffs = Eigen::VectorXcd::Zero(ms->size());
        t.modes = std::move(ms);
        return t;
    }

    /// Kronecker trace delta_{n = n0}.
    static BoundaryTrace delta(std::shared_ptr<const ModeSet> ms, long n0,
                               std::complex<double> value = 1.0) {
        BoundaryTrace t = zero(std::move(ms));
        t.coeffs[t.modes->index(n0)] = value;
        return t;
    }

    std::complex<double> coeff(long n) const { return coeffs[modes->index(n)]; }
    std::complex<double>& coeff(long n) { return coeffs[modes->index(n)]; }

    double l2_norm() const {
        return std::sqrt(modes->config.Lambda * coeffs.squaredNorm());
    }

    /// Pointwise reconstruction v(x1).
    std::complex<double> eval(double x1) const {
        std::complex<double> s = 0.0;
        for (int i = 0; i < modes->size(); ++i)
            s += coeffs[i] * std::exp(std::complex<double>(0.0, modes->alphas[static_cast<std::size_t>(i)] * x1));
        return s;
    }
};

inline void require_same_modes(const BoundaryTrace& a, const BoundaryTrace& b) {
    if (a.modes == b.modes) return;
    if (!a.modes || !b.modes || !(*a.modes == *b.modes))
        throw ModeSetMismatch("boundary traces built on different mode sets");
}

/// Dirichlet-to-Neumann operator: (Tv)_n = i beta_n v_n.
inline BoundaryTrace apply_dtn(const BoundaryTrace& v) {
    BoundaryTrace out = v;
    for (int i = 0; i < v.modes->size(); ++i)
        out.coeffs[i] = std::complex<double>(0.0, 1.0) * v.modes->betas[static_cast<std::size_t>(i)] * v.coeffs[i];
    return out;
}

/// Source trace g = d_nu u^i - T u^i = -2 i beta e^{i alpha x1 - i beta b}:
/// a single n = 0 coefficient -2 i beta e^{-i beta b}.
inline BoundaryTrace boundary_source(std::shared_ptr<const ModeSet> ms) {
    BoundaryTrace g = BoundaryTrace::zero(std::move(ms));
    const auto& cfg = g.modes->config;
    g.coeff(0) = std::complex<double>(0.0, -2.0 * cfg.beta) *
                 std::exp(std::complex<double>(0.0, -cfg.beta * cfg.b));
    return g;
}

/// Modal weight of the dual norm pair: sqrt(|k^2 - alpha_n^2|) + 1/b.
inline double norm_weight(const ModeSet& ms, int i) {
    const double a = ms.alphas[static_cast<std::size_t>(i)];
    const double k = ms.config.k;
    return std::sqrt(std::abs(k * k - a * a)) + 1.0 / ms.config.b;
}

/// ||v||_A = sqrt( sum |v_n|^2 / w_n ), the H^{-1/2}-like norm.
inline double norm_A(const BoundaryTrace& v) {
    double s = 0.0;
    for (int i = 0; i < v.modes->size(); ++i)
        s += std::norm(v.coeffs[i]) / norm_weight(*v.modes, i);
    return std::sqrt(s);
}

/// ||v||_B = sqrt( sum |v_n|^2 * w_n ), the H^{1/2}-like norm.
inline double norm_B(const BoundaryTrace& v) {
    double s = 0.0;
    for (int i = 0; i < v.modes->size(); ++i)
        s += std::norm(v.coeffs[i]) * norm_weight(*v.modes, i);
    return std::sqrt(s);
}

/// int_Gamma u conj(v) dx1 = Lambda sum u_n conj(v_n).
inline std::complex<double> gamma_inner(const BoundaryTrace& u, const BoundaryTrace& v) {
    require_same_modes(u, v);
    return u.modes->config.Lambda * v.coeffs.dot(u.coeffs); // dot conjugates its object
}

/// Split into the lower (|alpha_n| < k) and higher (|alpha_n| > k) frequency
/// parts; low + high == v coefficient-wise.
inline std::pair<BoundaryTrace, BoundaryTrace> split_LH(const BoundaryTrace& v) {
    BoundaryTrace low = BoundaryTrace::zero(v.modes);
    BoundaryTrace high = BoundaryTrace::zero(v.modes);
    const double k = v.modes->config.k;
    for (int i = 0; i < v.modes->size(); ++i) {
        const double a = std::abs(v.modes->alphas[static_cast<std::size_t>(i)]);
        if (a == k)
            throw ResonantMode("mode n = " + std::to_string(v.modes->order(i)) +
                               " sits exactly on the Rayleigh-Wood resonance");
        (a < k ? low : high).coeffs[i] = v.coeffs[i];
    }
    return {std::move(low), std::move(high)};
}

/// Margin of the resonance-exclusion inequality
///   Lambda sum sqrt(|k^2 - alpha_n^2|) |v_n|^2  >=  sqrt(eps) sqrt(k) ||v||^2_{L2}.
/// Returns LHS - RHS, which is >= 0 whenever eps <= resonance distance.
inline double check_lemma_sqrtk(const BoundaryTrace& v, double eps) {
    const auto& ms = *v.modes;
    const double k = ms.config.k;
    double lhs = 0.0;
    for (int i = 0; i < ms.size(); ++i) {
        const double a = ms.alphas[static_cast<std::size_t>(i)];
        lhs += std::sqrt(std::abs(k * k - a * a)) * std::norm(v.coeffs[i]);
    }
    lhs *= ms.config.Lambda;
    const double rhs = std::sqrt(eps) * std::sqrt(k) * ms.config.Lambda * v.coeffs.squaredNorm();
    return lhs - rhs;
}

/// Positive scale against which a lemma margin should be judged.
inline double lemma_margin_scale(const BoundaryTrace& v, double eps) {
    const auto& ms = *v.modes;
    const double k = ms.config.k;
    double lhs = 0.0;
    for (int i = 0; i < ms.size(); ++i) {
        const double a = ms.alphas[static_cast<std::size_t>(i)];
        lhs += std::sqrt(std::abs(k * k - a * a)) * std::norm(v.coeffs[i]);
    }
    lhs *= ms.config.Lambda;
    const double rhs = std::sqrt(eps) * std::sqrt(k) * ms.config.Lambda * v.coeffs.squaredNorm();
    return lhs + rhs;
}

/// Rayleigh amplitudes A_n of the scattered field, u^s_n = A_n e^{i beta_n b}
/// on Gamma. Evanescent extraction multiplies by e^{-i beta_n b}, which grows
/// like e^{Im beta_n b}; orders with Im beta_n * b > 30 would amplify
/// discretization noise past any signal and are marked absent.
struct RayleighAmplitudes {
    std::shared_ptr<const ModeSet> modes;
    Eigen::VectorXcd amps;
    std::vector<bool> present;
};

inline constexpr double rayleigh_absent_threshold = 30.0;

inline RayleighAmplitudes rayleigh_amplitudes(const BoundaryTrace& scattered_trace) {
    RayleighAmplitudes r;
    r.modes = scattered_trace.modes;
    const int m = r.modes->size();
    r.amps = Eigen::VectorXcd::Zero(m);
    r.present.assign(static_cast<std::size_t>(m), true);
    const double b = r.modes->config.b;
    for (int i = 0; i < m; ++i) {
        const std::complex<double> bn = r.modes->betas[static_cast<std::size_t>(i)];
        if (bn.imag() * b > rayleigh_absent_threshold) {
            r.present[static_cast<std::size_t>(i)] = false;
            continue;
        }
        r.amps[i] = scattered_trace.coeffs[i] *
                    std::exp(std::complex<double>(0.0, -1.0) * bn * b);
    }
    return r;
}

/// Diffraction efficiencies e_n = (Re beta_n / beta) |A_n|^2 of the
/// propagating orders. For a lossless perfect conductor sum e_n = 1.
inline std::map<long, double> efficiencies(const RayleighAmplitudes& amps) {
    std::map<long, double> e;
    const auto& ms = *amps.modes;
    for (int i = 0; i < ms.size(); ++i) {
        if (std::abs(ms.alphas[static_cast<std::size_t>(i)]) >= ms.config.k) continue;
        const double rb = ms.betas[static_cast<std::size_t>(i)].real();
        e[ms.order(i)] = rb / ms.config.beta * std::norm(amps.amps[i]);
    }
    return e;
}

inline double efficiency_sum(const std::map<long, double>& e) {
    double s = 0.0;
    for (const auto& [n, v] : e) s += v;
    return s;
}

} // namespace gratlab

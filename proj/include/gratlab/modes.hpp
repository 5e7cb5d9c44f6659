#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "gratlab/errors.hpp"

namespace gratlab {

inline constexpr double pi = 3.14159265358979323846264338327950288;

/// Incident plane wave u^i = e^{i(alpha x1 - beta x2)} over a Lambda-periodic
/// structure, with the artificial boundary Gamma at x2 = b.
struct PlaneWaveConfig {
    double k;      // wavenumber, > 0
    double theta;  // incidence angle in (-pi/2, pi/2), w.r.t. +x2 axis
    double Lambda; // period, > 0
    double b;      // height of Gamma, > sup f of any paired profile
    double alpha;  // k sin(theta)
    double beta;   // k cos(theta), > 0

    static PlaneWaveConfig make(double k, double theta, double Lambda, double b) {
        if (!(k > 0.0)) throw ValidationError("k", "> 0");
        if (!(theta > -pi / 2 && theta < pi / 2))
            throw ValidationError("theta", "in (-pi/2, pi/2)");
        if (!(Lambda > 0.0)) throw ValidationError("Lambda", "> 0");
        if (!(b > 0.0)) throw ValidationError("b", "> 0");
        return {k, theta, Lambda, b, k * std::sin(theta), k * std::cos(theta)};
    }

    friend bool operator==(const PlaneWaveConfig& a, const PlaneWaveConfig& b_) {
        return a.k == b_.k && a.theta == b_.theta && a.Lambda == b_.Lambda && a.b == b_.b;
    }
};

/// Transverse wavenumber of order n: alpha_n = alpha + 2 pi n / Lambda.
inline double alpha_n(const PlaneWaveConfig& cfg, long n) {
    return cfg.alpha + 2.0 * pi * static_cast<double>(n) / cfg.Lambda;
}

/// Vertical wavenumber beta_n with beta_n^2 = k^2 - alpha_n^2.
/// Branch: real nonnegative for propagating orders (|alpha_n| < k),
/// purely imaginary with positive imaginary part for evanescent ones.
inline std::complex<double> beta_n(const PlaneWaveConfig& cfg, long n) {
    const double a = alpha_n(cfg, n);
    const double d = cfg.k * cfg.k - a * a;
    if (d >= 0.0) return {std::sqrt(d), 0.0};
    return {0.0, std::sqrt(-d)};
}

/// Smallest admissible truncation order: every propagating order plus two
/// evanescent orders on each side.
inline int min_truncation(const PlaneWaveConfig& cfg) {
    return static_cast<int>(std::ceil(cfg.Lambda * cfg.k / (2.0 * pi))) + 2;
}

/// Default truncation order; the extra evanescent tail decays below 1e-10
/// at Gamma for b >= 1.
inline int default_truncation(const PlaneWaveConfig& cfg) {
    return static_cast<int>(std::ceil(cfg.Lambda * cfg.k / (2.0 * pi))) + 8;
}

/// Truncated quasi-periodic mode family {(alpha_n, beta_n)}, n = -N..N,
/// plus the resonance distance epsilon = min_n | |alpha_n| - k |.
/// Immutable after construction.
struct ModeSet {
    PlaneWaveConfig config;
    int N = 0;
    std::vector<double> alphas;               // index i <-> order n = i - N
    std::vector<std::complex<double>> betas;  // same indexing
    double epsilon = 0.0;

    int size() const { return 2 * N + 1; }
    long order(int i) const { return static_cast<long>(i) - N; }
    int index(long n) const { return static_cast<int>(n) + N; }
    double alpha(long n) const { return alphas[static_cast<std::size_t>(index(n))]; }
    std::complex<double> beta(long n) const { return betas[static_cast<std::size_t>(index(n))]; }

    friend bool operator==(const ModeSet& a, const ModeSet& b) {
        return a.config == b.config && a.N == b.N;
    }
};

inline double resonance_distance(const PlaneWaveConfig& cfg, int N) {
    double eps = std::abs(std::abs(alpha_n(cfg, -static_cast<long>(N))) - cfg.k);
    for (long n = -static_cast<long>(N) + 1; n <= N; ++n)
        eps = std::min(eps, std::abs(std::abs(alpha_n(cfg, n)) - cfg.k));
    return eps;
}

inline ModeSet make_modes(const PlaneWaveConfig& cfg, int N) {
    if (N < min_truncation(cfg))
        throw TruncationTooSmall("truncation N = " + std::to_string(N) +
                                 " < required " + std::to_string(min_truncation(cfg)));
    ModeSet ms;
    ms.config = cfg;
    ms.N = N;
    ms.alphas.reserve(static_cast<std::size_t>(2 * N + 1));
    ms.betas.reserve(static_cast<std::size_t>(2 * N + 1));
    for (long n = -static_cast<long>(N); n <= N; ++n) {
        ms.alphas.push_back(alpha_n(cfg, n));
        ms.betas.push_back(beta_n(cfg, n));
    }
    ms.epsilon = resonance_distance(cfg, N);
    return ms;
}

/// Assumption "exclusion of resonances": true iff the mode family keeps the
/// symmetric distance | |alpha_n| - k | at least eps_min.
inline bool is_admissible(const PlaneWaveConfig& cfg, int N, double eps_min) {
    if (!(eps_min > 0.0)) throw ValidationError("eps_min", "> 0");
    return resonance_distance(cfg, N) >= eps_min;
}

/// The literal paper distance min_n |k - alpha_n| (diagnostic only; the
/// symmetric distance above is what the mode algebra needs).
inline double literal_resonance_distance(const PlaneWaveConfig& cfg, int N) {
    double eps = std::abs(cfg.k - alpha_n(cfg, -static_cast<long>(N)));
    for (long n = -static_cast<long>(N) + 1; n <= N; ++n)
        eps = std::min(eps, std::abs(cfg.k - alpha_n(cfg, n)));
    return eps;
}

} // namespace gratlab

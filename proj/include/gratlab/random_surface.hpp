#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gratlab/errors.hpp"
#include "gratlab/profile.hpp"
#include "gratlab/rng.hpp"
#include "gratlab/transform.hpp"

namespace gratlab {

/// Karhunen-Loeve model of a random grating surface around a deterministic
/// mean profile, for the stationary Gaussian covariance
///     c(tau) = sigma^2 exp(-tau^2 / ell^2),  0 < ell << Lambda.
/// Eigenfunctions are the orthonormal Fourier family sqrt(1/Lambda),
/// sqrt(2/Lambda) sin(2 pi j x / Lambda), sqrt(2/Lambda) cos(2 pi j x / Lambda);
/// the sine and cosine at the same j share the eigenvalue lambda_j.
struct KLModel {
    GratingProfile mean = GratingProfile::flat(1.0); // trig representation required
    double sigma = 0.0;
    double ell = 0.0;
    double Lambda = 0.0;
    int J = 0;
    std::vector<double> lambdas; // lambda_0..lambda_J, nonnegative, nonincreasing

    int dim() const { return 2 * J + 1; } // xi vector length
};

namespace detail {

/// Covariance periodized by image sums, truncated below 1e-16 relative.
inline double periodized_covariance(double tau, double sigma, double ell, double Lambda) {
    double s = 0.0;
    for (int m = 0;; ++m) {
        const double tp = std::exp(-std::pow((tau + m * Lambda) / ell, 2));
        const double tm = m > 0 ? std::exp(-std::pow((tau - m * Lambda) / ell, 2)) : 0.0;
        s += tp + tm;
        if (m > 0 && tp + tm < 1e-16) break;
    }
    return sigma * sigma * s;
}

} // namespace detail

/// Eigenvalues lambda_j = int_{-Lambda/2}^{Lambda/2} c_per(tau) cos(2 pi j tau / Lambda) dtau
/// by trapezoid quadrature of the periodized covariance (spectrally accurate:
/// the integrand is smooth and periodic). Quadrature resolution is chosen so
/// that aliasing sits below 1e-12 of lambda_0.
inline std::vector<double> kl_eigenvalues(double sigma, double ell, double Lambda, int J,
                                          int quad_nodes = 0) {
    if (!(sigma >= 0.0)) throw ValidationError("sigma", ">= 0");
    if (!(ell > 0.0 && ell < Lambda / 4.0)) throw ValidationError("ell", "in (0, Lambda/4)");
    if (J < 0) throw ValidationError("J", ">= 0");

    int Q = quad_nodes;
    if (Q <= 0) {
        Q = 1024;
        while (Q < 4 * (J + 2)) Q *= 2;
    }
    // Samples of the periodized covariance over one period.
    std::vector<double> c(static_cast<std::size_t>(Q));
    for (int q = 0; q < Q; ++q) {
        const double tau = -0.5 * Lambda + Lambda * static_cast<double>(q) / static_cast<double>(Q);
        c[static_cast<std::size_t>(q)] = detail::periodized_covariance(tau, sigma, ell, Lambda);
    }
    // Accumulate all cosine moments in one pass with the Chebyshev recurrence
    // cos((j+1)t) = 2 cos(t) cos(jt) - cos((j-1)t).
    std::vector<double> lam(static_cast<std::size_t>(J + 1), 0.0);
    const double dtau = Lambda / static_cast<double>(Q);
    for (int q = 0; q < Q; ++q) {
        const double t = 2.0 * pi * (-0.5 + static_cast<double>(q) / static_cast<double>(Q));
        const double ct = std::cos(t);
        double cj = 1.0, cjm1 = ct; // cos(0*t), cos(-t)
        const double w = c[static_cast<std::size_t>(q)] * dtau;
        for (int j = 0; j <= J; ++j) {
            lam[static_cast<std::size_t>(j)] += w * cj;
            const double cjp1 = 2.0 * ct * cj - cjm1;
            cjm1 = cj;
            cj = cjp1;
        }
    }
    for (int j = 0; j <= J; ++j) {
        double& l = lam[static_cast<std::size_t>(j)];
        if (l < -1e-12)
            throw NonPositiveEigenvalue("lambda_" + std::to_string(j) + " = " +
                                        std::to_string(l) + "; quadrature under-resolved");
        if (l < 0.0) l = 0.0;
    }
    return lam;
}

/// Truncation rule: smallest J with lambda_J / lambda_0 < 1e-8 (the
/// eigenvalues decay exponentially).
inline int kl_default_truncation(double sigma, double ell, double Lambda) {
    (void)sigma; // the ratio is sigma-independent
    const double r = std::sqrt(std::log(1e8)) * Lambda / (pi * ell);
    return static_cast<int>(std::ceil(r));
}

inline KLModel kl_eigenpairs(GratingProfile mean, double sigma, double ell, int J = -1) {
    if (!mean.is_trig())
        throw ValidationError("mean", "a trigonometric-series profile");
    KLModel m;
    m.Lambda = mean.period();
    m.mean = std::move(mean);
    m.sigma = sigma;
    m.ell = ell;
    m.J = J >= 0 ? J : kl_default_truncation(sigma, ell, m.Lambda);
    m.lambdas = kl_eigenvalues(sigma, ell, m.Lambda, m.J);
    // trace bound of the covariance operator
    double tr = 0.0;
    for (double l : m.lambdas) tr += l;
    if (sigma > 0.0 && tr > sigma * sigma * m.Lambda * (1.0 + 1e-9))
        throw NonPositiveEigenvalue("eigenvalue sum exceeds the covariance trace bound");
    return m;
}

inline KLModel kl_eigenpairs(double sigma, double ell, double Lambda, int J = -1) {
    return kl_eigenpairs(GratingProfile::flat(Lambda), sigma, ell, J);
}

/// Surface sample from the KL formula,
///   f = mean + sqrt(lambda_0) xi_0 sqrt(1/Lambda)
///          + sum_j sqrt(lambda_j) sqrt(2/Lambda) (xi_{j,s} sin + xi_{j,c} cos).
/// xi layout: [xi_0, xi_{1,s}, xi_{1,c}, ..., xi_{J,s}, xi_{J,c}].
inline GratingProfile sample_surface(const KLModel& model, const std::vector<double>& xi) {
    if (static_cast<int>(xi.size()) != model.dim())
        throw ValidationError("xi", "a vector of 2J+1 standard normals");
    const double Lam = model.Lambda;
    const std::size_t J = static_cast<std::size_t>(model.J);
    std::vector<double> a(model.mean.cos_coeffs());
    std::vector<double> b(model.mean.sin_coeffs());
    if (a.size() < J) a.resize(J, 0.0);
    if (b.size() < J) b.resize(J, 0.0);
    double a0 = model.mean.a0() + std::sqrt(model.lambdas[0] / Lam) * xi[0];
    for (std::size_t j = 1; j <= J; ++j) {
        const double amp = std::sqrt(2.0 * model.lambdas[j] / Lam);
        b[j - 1] += amp * xi[2 * j - 1]; // sine coefficient
        a[j - 1] += amp * xi[2 * j];     // cosine coefficient
    }
    return GratingProfile::trig(Lam, a0, std::move(a), std::move(b));
}

inline std::vector<double> draw_xi(const KLModel& model, std::uint64_t seed) {
    NormalSampler normal(seed);
    std::vector<double> xi(static_cast<std::size_t>(model.dim()));
    for (double& v : xi) v = normal();
    return xi;
}

/// Admissibility screen for a sampled surface: height headroom sup|f| < b/4
/// and the flattening-map injectivity margin 1 - sup|f| * 3/gamma0 > 0 at
/// the default cutoff height gamma0 = min(b/2, 1).
struct ScreenResult {
    bool accepted = false;
    std::string reason; // empty when accepted; "height" or "steepness"
    std::string detail;
};

inline ScreenResult screen_sample(const GratingProfile& profile, double b) {
    const double sup = profile.sup_estimate();
    if (!(sup < 0.25 * b))
        return {false, "height",
                "sup|f| = " + std::to_string(sup) + " >= b/4 = " + std::to_string(0.25 * b)};
    const double g0 = std::min(0.5 * b, 1.0);
    if (!(sup * 3.0 / g0 < 1.0))
        return {false, "steepness",
                "injectivity margin 1 - sup|f|*3/gamma0 <= 0 (sup|f| = " + std::to_string(sup) +
                    ", gamma0 = " + std::to_string(g0) + ")"};
    return {true, "", ""};
}

} // namespace gratlab

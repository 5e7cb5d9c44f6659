#pragma once

#include <algorithm>
#include <cmath>

#include "gratlab/errors.hpp"
#include "gratlab/profile.hpp"

namespace gratlab {

/// C^1 cutoff in the vertical coordinate: 1 on (-inf, gamma0/2], 0 on
/// [gamma0, inf), cubic Hermite blend s(r) = 3r^2 - 2r^3 in between.
/// max |alpha'| = 3 / gamma0.
inline double cutoff_alpha(double t, double gamma0) {
    if (t <= 0.5 * gamma0) return 1.0;
    if (t >= gamma0) return 0.0;
    const double r = (t - 0.5 * gamma0) / (0.5 * gamma0);
    return 1.0 - r * r * (3.0 - 2.0 * r);
}

inline double cutoff_alpha_deriv(double t, double gamma0) {
    if (t <= 0.5 * gamma0 || t >= gamma0) return 0.0;
    const double r = (t - 0.5 * gamma0) / (0.5 * gamma0);
    return -6.0 * r * (1.0 - r) / (0.5 * gamma0);
}

/// Default cutoff height: min(b/2, 1), subject to the injectivity margin
/// sup|f| * (3/gamma0) <= 1/2 and the height headroom b > 4 sup|f|.
inline double gamma0_default(const GratingProfile& profile, double b) {
    const double sup = profile.sup_estimate();
    if (!(b > 4.0 * sup))
        throw ProfileTooSteep("boundary height b = " + std::to_string(b) +
                              " <= 4 sup|f| = " + std::to_string(4.0 * sup));
    const double g0 = std::min(0.5 * b, 1.0);
    if (sup * 3.0 / g0 > 0.5)
        throw ProfileTooSteep("injectivity margin sup|f|*3/gamma0 = " +
                              std::to_string(sup * 3.0 / g0) + " > 1/2");
    return g0;
}

struct JacobianCoeffs {
    double detJ; // det J_F = 1 + alpha'(y2) f(y1), > 0
    double b11;  // = 1
    double b12;  // = -alpha(y2) f'(y1) / detJ   (b21 = b12)
    double b22;  // = (1 + (alpha(y2) f'(y1))^2) / detJ^2
};

/// Diffeomorphism F(y1, y2) = (y1, y2 + cutoff(y2) f(y1)) from the reference
/// rectangle [0, Lambda] x [0, b] onto the grating domain. Identity for
/// y2 >= gamma0, so the transparent boundary condition on Gamma is untouched;
/// the bottom edge y2 = 0 maps onto the surface x2 = f(y1).
class FlatteningMap {
public:
    FlatteningMap(GratingProfile profile, double b, double gamma0)
        : profile_(std::move(profile)), b_(b), gamma0_(gamma0) {
        if (!(gamma0 > 0.0)) throw ValidationError("gamma0", "> 0");
        if (!(b >= gamma0)) throw ValidationError("b", ">= gamma0");
        sup_ = profile_.sup_estimate();
        margin_ = 1.0 - sup_ * 3.0 / gamma0_;
        if (!(margin_ > 0.0))
            throw InjectivityViolated(
                "profile too steep/tall for cutoff height: sup|f|*3/gamma0 = " +
                std::to_string(sup_ * 3.0 / gamma0_));
    }

    const GratingProfile& profile() const { return profile_; }
    double b() const { return b_; }
    double gamma0() const { return gamma0_; }
    double injectivity_margin() const { return margin_; }

    /// x = F(y).
    void map(double y1, double y2, double& x1, double& x2) const {
        x1 = y1;
        x2 = y2 + cutoff_alpha(y2, gamma0_) * profile_.eval(y1);
    }

    JacobianCoeffs jacobian(double y1, double y2) const {
        if (y2 >= gamma0_) return {1.0, 1.0, 0.0, 1.0};
        const double f = profile_.eval(y1);
        const double fp = profile_.deriv(y1);
        const double a = cutoff_alpha(y2, gamma0_);
        const double ap = cutoff_alpha_deriv(y2, gamma0_);
        const double detJ = 1.0 + ap * f; // = d x2 / d y2
        const double c = a * fp;          // = d x2 / d y1
        return {detJ, 1.0, -c / detJ, (1.0 + c * c) / (detJ * detJ)};
    }

    /// Coefficient fields of the transformed divergence form
    /// -d_j ( detJ b_ij d_i u ) = k^2 detJ u :
    /// c11 = detJ, c12 = detJ b12 = -alpha(y2) f'(y1), c22 = detJ b22.
    void weak_coeffs(double y1, double y2, double& c11, double& c12, double& c22) const {
        if (y2 >= gamma0_) {
            c11 = 1.0;
            c12 = 0.0;
            c22 = 1.0;
            return;
        }
        const double f = profile_.eval(y1);
        const double fp = profile_.deriv(y1);
        const double a = cutoff_alpha(y2, gamma0_);
        const double ap = cutoff_alpha_deriv(y2, gamma0_);
        const double detJ = 1.0 + ap * f;
        const double c = a * fp;
        c11 = detJ;
        c12 = -c;
        c22 = (1.0 + c * c) / detJ;
    }

    /// Numerical inverse y2 of x2 = y2 + cutoff(y2) f(y1) by bisection
    /// (monotone in y2 by the injectivity margin).
    double invert_y2(double y1, double x2) const {
        const double f = profile_.eval(y1);
        double lo = 0.0, hi = b_;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double val = mid + cutoff_alpha(mid, gamma0_) * f;
            (val < x2 ? lo : hi) = mid;
            if (hi - lo < 1e-15 * std::max(1.0, b_)) break;
        }
        return 0.5 * (lo + hi);
    }

private:
    GratingProfile profile_;
    double b_;
    double gamma0_;
    double sup_ = 0.0;
    double margin_ = 0.0;
};

inline FlatteningMap make_map(GratingProfile profile, double b) {
    const double g0 = gamma0_default(profile, b);
    return FlatteningMap(std::move(profile), b, g0);
}

inline FlatteningMap make_map(GratingProfile profile, double b, double gamma0) {
    return FlatteningMap(std::move(profile), b, gamma0);
}

} // namespace gratlab

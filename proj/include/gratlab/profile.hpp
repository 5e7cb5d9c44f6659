#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gratlab/errors.hpp"
#include "gratlab/modes.hpp"

namespace gratlab {

/// Lambda-periodic grating surface x2 = f(x1), either as a trigonometric
/// series
///     f(x1) = a0 + sum_j a_j cos(2 pi j x1 / Lambda) + b_j sin(2 pi j x1 / Lambda)
/// or as uniform samples with linear interpolation.
class GratingProfile {
public:
    enum class Kind { Trig, Samples };

    static GratingProfile flat(double Lambda) {
        return trig(Lambda, 0.0, {}, {});
    }

    static GratingProfile trig(double Lambda, double a0,
                               std::vector<double> cos_coeffs,
                               std::vector<double> sin_coeffs) {
        if (!(Lambda > 0.0)) throw ValidationError("Lambda", "> 0");
        GratingProfile p;
        p.kind_ = Kind::Trig;
        p.Lambda_ = Lambda;
        p.a0_ = a0;
        if (cos_coeffs.size() < sin_coeffs.size()) cos_coeffs.resize(sin_coeffs.size(), 0.0);
        if (sin_coeffs.size() < cos_coeffs.size()) sin_coeffs.resize(cos_coeffs.size(), 0.0);
        p.a_ = std::move(cos_coeffs);
        p.b_ = std::move(sin_coeffs);
        return p;
    }

    /// f(x1) = amplitude * sin(2 pi x1 / Lambda)
    static GratingProfile sinusoid(double Lambda, double amplitude) {
        return trig(Lambda, 0.0, {0.0}, {amplitude});
    }

    static GratingProfile samples(double Lambda, std::vector<double> values) {
        if (!(Lambda > 0.0)) throw ValidationError("Lambda", "> 0");
        if (values.size() < 2) throw ValidationError("profile.values", "at least 2 samples");
        GratingProfile p;
        p.kind_ = Kind::Samples;
        p.Lambda_ = Lambda;
        p.v_ = std::move(values);
        return p;
    }

    Kind kind() const { return kind_; }
    double period() const { return Lambda_; }
    bool is_trig() const { return kind_ == Kind::Trig; }
    double a0() const { return a0_; }
    const std::vector<double>& cos_coeffs() const { return a_; }
    const std::vector<double>& sin_coeffs() const { return b_; }
    std::size_t harmonics() const { return a_.size(); }

    double eval(double x) const {
        if (kind_ == Kind::Trig) {
            double s = a0_;
            const double w = 2.0 * pi / Lambda_;
            for (std::size_t j = 0; j < a_.size(); ++j) {
                const double t = w * static_cast<double>(j + 1) * x;
                s += a_[j] * std::cos(t) + b_[j] * std::sin(t);
            }
            return s;
        }
        const auto m = static_cast<double>(v_.size());
        double u = (x / Lambda_) * m;
        u -= std::floor(u / m) * m; // wrap into [0, m)
        const auto i0 = static_cast<std::size_t>(u) % v_.size();
        const auto i1 = (i0 + 1) % v_.size();
        const double frac = u - std::floor(u);
        return v_[i0] * (1.0 - frac) + v_[i1] * frac;
    }

    /// f'(x1). Samples: slope of the containing segment; at a node the
    /// average of the adjacent slopes.
    double deriv(double x) const {
        if (kind_ == Kind::Trig) {
            double s = 0.0;
            const double w = 2.0 * pi / Lambda_;
            for (std::size_t j = 0; j < a_.size(); ++j) {
                const double wj = w * static_cast<double>(j + 1);
                const double t = wj * x;
                s += wj * (-a_[j] * std::sin(t) + b_[j] * std::cos(t));
            }
            return s;
        }
        const auto m = static_cast<double>(v_.size());
        const double dx = Lambda_ / m;
        double u = (x / Lambda_) * m;
        u -= std::floor(u / m) * m;
        const auto i0 = static_cast<std::size_t>(u) % v_.size();
        const double frac = u - std::floor(u);
        const auto prev = (i0 + v_.size() - 1) % v_.size();
        const auto next = (i0 + 1) % v_.size();
        const auto next2 = (i0 + 2) % v_.size();
        if (frac < 1e-12 || frac > 1.0 - 1e-12) {
            // node: average of adjacent slopes
            const auto lo = frac < 1e-12 ? prev : i0;
            const auto hi = frac < 1e-12 ? next : next2;
            const auto mid = frac < 1e-12 ? i0 : next;
            return 0.5 * ((v_[mid] - v_[lo]) + (v_[hi] - v_[mid])) / dx;
        }
        return (v_[next] - v_[i0]) / dx;
    }

    /// Upper bound on sup |f| (trig: |a0| + sum(|a_j|+|b_j|); samples: max |v|).
    double sup_bound() const {
        if (kind_ == Kind::Trig) {
            double s = std::abs(a0_);
            for (std::size_t j = 0; j < a_.size(); ++j) s += std::abs(a_[j]) + std::abs(b_[j]);
            return s;
        }
        double s = 0.0;
        for (double v : v_) s = std::max(s, std::abs(v));
        return s;
    }

    /// Sharp upper bound on sup |f|: grid maximum plus the Lipschitz slack
    /// over one grid cell. Exact for sampled profiles (piecewise linear
    /// attains its extrema at the nodes).
    double sup_estimate() const {
        if (kind_ == Kind::Samples) return sup_bound();
        const int n = std::max<int>(256, 8 * static_cast<int>(a_.size()));
        double m = 0.0;
        for (int i = 0; i < n; ++i)
            m = std::max(m, std::abs(eval(Lambda_ * static_cast<double>(i) / n)));
        return m + 0.5 * lipschitz_bound() * Lambda_ / static_cast<double>(n);
    }

    /// Upper bound on ||f'||_inf (trig: sum (2 pi j / Lambda)(|a_j|+|b_j|);
    /// samples: max segment slope).
    double lipschitz_bound() const {
        if (kind_ == Kind::Trig) {
            double s = 0.0;
            const double w = 2.0 * pi / Lambda_;
            for (std::size_t j = 0; j < a_.size(); ++j)
                s += w * static_cast<double>(j + 1) * (std::abs(a_[j]) + std::abs(b_[j]));
            return s;
        }
        const double dx = Lambda_ / static_cast<double>(v_.size());
        double s = 0.0;
        for (std::size_t i = 0; i < v_.size(); ++i)
            s = std::max(s, std::abs(v_[(i + 1) % v_.size()] - v_[i]) / dx);
        return s;
    }

    bool is_identically_zero() const {
        if (kind_ == Kind::Trig) {
            if (a0_ != 0.0) return false;
            for (std::size_t j = 0; j < a_.size(); ++j)
                if (a_[j] != 0.0 || b_[j] != 0.0) return false;
            return true;
        }
        for (double v : v_)
            if (v != 0.0) return false;
        return true;
    }

private:
    GratingProfile() = default;
    Kind kind_ = Kind::Trig;
    double Lambda_ = 1.0;
    double a0_ = 0.0;
    std::vector<double> a_, b_; // trig
    std::vector<double> v_;     // samples
};

} // namespace gratlab

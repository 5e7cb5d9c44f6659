#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <memory>
#include <random>

#include "gratlab/boundary.hpp"
#include "gratlab/rng.hpp"

using namespace gratlab;
using Catch::Approx;
using C = std::complex<double>;

namespace {

std::shared_ptr<const ModeSet> modes(double k, double theta = 0.0, double Lambda = 2 * pi,
                                     double b = 1.0, int N = -1) {
    const auto cfg = PlaneWaveConfig::make(k, theta, Lambda, b);
    return std::make_shared<const ModeSet>(
        make_modes(cfg, N > 0 ? N : default_truncation(cfg)));
}

BoundaryTrace random_trace(std::shared_ptr<const ModeSet> ms, std::uint64_t seed) {
    NormalSampler normal(seed);
    BoundaryTrace t = BoundaryTrace::zero(std::move(ms));
    for (int i = 0; i < t.modes->size(); ++i) t.coeffs[i] = C(normal(), normal());
    return t;
}

} // namespace

TEST_CASE("DtN is diagonal: apply_dtn(delta_n) has support {n} exactly") {
    auto ms = modes(2.0);
    const auto tv = apply_dtn(BoundaryTrace::delta(ms, 0));
    for (int i = 0; i < ms->size(); ++i) {
        if (ms->order(i) == 0)
            CHECK(tv.coeffs[i] == C(0.0, 2.0)); // i*beta_0 = 2i at k=2, theta=0
        else
            CHECK(tv.coeffs[i] == C(0.0, 0.0));
    }
}

TEST_CASE("DtN of the zero trace is zero; linearity") {
    auto ms = modes(2.0);
    CHECK(apply_dtn(BoundaryTrace::zero(ms)).coeffs.norm() == 0.0);
    auto u = random_trace(ms, 11), v = random_trace(ms, 12);
    BoundaryTrace w = u;
    w.coeffs = 2.0 * u.coeffs + 3.0 * v.coeffs;
    const auto tw = apply_dtn(w);
    const Eigen::VectorXcd lin = 2.0 * apply_dtn(u).coeffs + 3.0 * apply_dtn(v).coeffs;
    CHECK((tw.coeffs - lin).norm() <= 1e-14 * lin.norm());
}

TEST_CASE("DtN evanescent branch: (T delta_3)_3 = -sqrt(2.75) at k=2.5") {
    auto ms = modes(2.5);
    const auto tv = apply_dtn(BoundaryTrace::delta(ms, 3));
    CHECK(tv.coeff(3).real() == Approx(-std::sqrt(2.75)).epsilon(1e-14));
    CHECK(tv.coeff(3).imag() == 0.0);
}

TEST_CASE("mode set mismatch is rejected") {
    auto a = random_trace(modes(2.0), 1);
    auto b = random_trace(modes(2.5), 2);
    CHECK_THROWS_AS(gamma_inner(a, b), ModeSetMismatch);
}

TEST_CASE("boundary source: single mode -2 i beta e^{-i beta b}") {
    auto ms = modes(2.5, 0.0, 2 * pi, 1.0);
    const auto g = boundary_source(ms);
    const C expect = C(0.0, -5.0) * std::exp(C(0.0, -2.5));
    CHECK(std::abs(g.coeff(0) - expect) <= 1e-15 * std::abs(expect));
    for (int i = 0; i < ms->size(); ++i)
        if (ms->order(i) != 0) CHECK(g.coeffs[i] == C(0.0, 0.0));
    // ||g|| = 2 beta sqrt(Lambda) = 5 sqrt(2 pi)
    CHECK(g.l2_norm() == Approx(5.0 * std::sqrt(2 * pi)).epsilon(1e-14));
}

TEST_CASE("boundary source vanishes at grazing incidence") {
    auto ms = modes(2.5, pi / 2 - 1e-9);
    CHECK(boundary_source(ms).l2_norm() <= 1e-7); // ||g|| = 2 k sin(1e-9) sqrt(Lambda)
}

TEST_CASE("norms A and B: single-mode evaluation") {
    auto ms = modes(2.5);
    for (long n0 : {0L, 2L, 5L}) {
        const auto v = BoundaryTrace::delta(ms, n0);
        const double an = ms->alpha(n0);
        const double w = std::sqrt(std::abs(2.5 * 2.5 - an * an)) + 1.0;
        CHECK(norm_A(v) * norm_A(v) == Approx(1.0 / w).epsilon(1e-14));
        CHECK(norm_B(v) * norm_B(v) == Approx(w).epsilon(1e-14));
    }
}

TEST_CASE("norms cross-checked by independent direct summation") {
    auto ms = modes(2.5, 0.0, 2 * pi, 1.0, 7);
    REQUIRE(ms->size() == 15);
    const auto v = random_trace(ms, 99);
    double a2 = 0.0, b2 = 0.0;
    for (long n = -7; n <= 7; ++n) {
        const double an = ms->config.alpha + n; // Lambda = 2 pi
        const double w = std::sqrt(std::abs(6.25 - an * an)) + 1.0;
        a2 += std::norm(v.coeff(n)) / w;
        b2 += std::norm(v.coeff(n)) * w;
    }
    CHECK(norm_A(v) == Approx(std::sqrt(a2)).epsilon(1e-14));
    CHECK(norm_B(v) == Approx(std::sqrt(b2)).epsilon(1e-14));
}

TEST_CASE("norm product dominates the plain coefficient sum (dual weights)") {
    auto ms = modes(3.7, 0.21);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto v = random_trace(ms, 1000 + s);
        CHECK(norm_A(v) * norm_B(v) >= v.coeffs.squaredNorm() * (1.0 - 1e-13));
    }
}

TEST_CASE("Parseval: quadrature of the reconstructed trace matches the coefficient sum") {
    auto ms = modes(2.5, 0.17);
    const auto v = random_trace(ms, 5);
    const int Q = 8 * ms->size();
    const double Lam = ms->config.Lambda;
    double quad = 0.0;
    for (int q = 0; q < Q; ++q)
        quad += std::norm(v.eval(Lam * q / Q)) * (Lam / Q);
    CHECK(quad == Approx(v.l2_norm() * v.l2_norm()).epsilon(1e-10));
}

TEST_CASE("split_LH partitions the trace") {
    auto ms = modes(2.5);
    const auto v = random_trace(ms, 31);
    const auto [low, high] = split_LH(v);
    for (int i = 0; i < ms->size(); ++i) {
        const long n = ms->order(i);
        const bool is_low = std::abs(ms->alphas[static_cast<std::size_t>(i)]) < 2.5;
        // k=2.5, theta=0: |n| <= 2 in low, |n| >= 3 in high
        CHECK(is_low == (std::abs(n) <= 2));
        CHECK((low.coeffs[i] + high.coeffs[i]) == v.coeffs[i]); // bitwise partition
        if (is_low) CHECK(high.coeffs[i] == C(0.0, 0.0));
        else CHECK(low.coeffs[i] == C(0.0, 0.0));
    }
}

TEST_CASE("split_LH rejects an exact resonance") {
    auto ms = std::make_shared<const ModeSet>(
        make_modes(PlaneWaveConfig::make(3.0, 0.0, 2 * pi, 1.0), 6));
    const auto v = random_trace(ms, 1);
    CHECK_THROWS_AS(split_LH(v), ResonantMode);
}

TEST_CASE("high-frequency energy sign: Re(sum (Tv)_n conj(v_n)) <= 0 on H") {
    auto ms = modes(2.5, 0.11);
    auto v = random_trace(ms, 77);
    auto [low, high] = split_LH(v);
    const auto th = apply_dtn(high);
    double re = 0.0;
    for (int i = 0; i < ms->size(); ++i) {
        const C prod = th.coeffs[i] * std::conj(high.coeffs[i]);
        re += prod.real();
        // per-mode product is real and nonpositive (beta_n imaginary on H)
        CHECK(std::abs(prod.imag()) <= 1e-14 * std::abs(prod.real() + 1e-300));
        CHECK(prod.real() <= 0.0);
    }
    CHECK(re <= 0.0);
}

TEST_CASE("lemma margin: single-mode arithmetic value") {
    auto ms = modes(2.5, 0.0, 2 * pi, 1.0);
    REQUIRE(ms->epsilon == Approx(0.5));
    const auto v = BoundaryTrace::delta(ms, 0);
    const double expect = 2 * pi * (2.5 - std::sqrt(0.5) * std::sqrt(2.5));
    CHECK(check_lemma_sqrtk(v, 0.5) == Approx(expect).epsilon(1e-13));
    CHECK(check_lemma_sqrtk(BoundaryTrace::zero(ms), 0.5) == 0.0);
}

TEST_CASE("lemma margin is nonnegative for random traces at admissible configs") {
    auto run = [](double k, double theta) {
        auto ms = modes(k, theta);
        for (std::uint64_t s = 0; s < 100; ++s) {
            const auto v = random_trace(ms, 7000 + s);
            const double margin = check_lemma_sqrtk(v, ms->epsilon);
            const double scale = lemma_margin_scale(v, ms->epsilon);
            CHECK(margin >= -1e-12 * scale);
        }
    };
    run(2.5, 0.0);
    run(4.4, 0.0);
    run(6.3, 0.29);
}

TEST_CASE("duality: |int u conj(v)| <= Lambda ||u||_A ||v||_B (sharp constant)") {
    auto ms = modes(2.5);
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto u = random_trace(ms, 2 * s), v = random_trace(ms, 2 * s + 1);
        const double lhs = std::abs(gamma_inner(u, v));
        CHECK(lhs <= 2 * pi * norm_A(u) * norm_B(v) * (1.0 + 1e-13));
    }
}

TEST_CASE("rayleigh amplitudes: flat-grating images solution gives A_0 = -1") {
    // u^s on Gamma for f == 0 is -e^{i alpha x1 + i beta b}: single mode,
    // hat u^s_0 = -e^{i beta b}, so A_0 = hat u^s_0 e^{-i beta b} = -1.
    auto ms = modes(2.5, 0.3);
    auto scattered = BoundaryTrace::zero(ms);
    scattered.coeff(0) = -std::exp(C(0.0, ms->config.beta * ms->config.b));
    const auto amps = rayleigh_amplitudes(scattered);
    CHECK(std::abs(amps.amps[ms->index(0)] - C(-1.0, 0.0)) <= 1e-14);
    const auto eff = efficiencies(amps);
    CHECK(eff.at(0) == Approx(1.0).epsilon(1e-14));
    CHECK(efficiency_sum(eff) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("rayleigh amplitudes: zero trace, evanescent magnitude, absence cutoff") {
    auto ms = modes(2.5, 0.0, 2 * pi, 1.0, 40); // wide truncation: deep evanescents
    const auto zero = rayleigh_amplitudes(BoundaryTrace::zero(ms));
    CHECK(zero.amps.norm() == 0.0);

    auto v = BoundaryTrace::delta(ms, 4, C(0.3, -0.2));
    const auto amps = rayleigh_amplitudes(v);
    // |A_n| = |hat u^s_n| e^{Im beta_n b}
    const double expect = std::abs(C(0.3, -0.2)) * std::exp(ms->beta(4).imag() * 1.0);
    CHECK(std::abs(amps.amps[ms->index(4)]) == Approx(expect).epsilon(1e-13));

    // deep evanescent orders (Im beta_n b > 30) are reported absent
    bool found_absent = false;
    for (int i = 0; i < ms->size(); ++i)
        if (!amps.present[static_cast<std::size_t>(i)]) {
            found_absent = true;
            CHECK(ms->betas[static_cast<std::size_t>(i)].imag() * 1.0 > 30.0);
        }
    CHECK(found_absent);
}

TEST_CASE("efficiencies of the zero field vanish") {
    auto ms = modes(2.5);
    const auto eff = efficiencies(rayleigh_amplitudes(BoundaryTrace::zero(ms)));
    CHECK(efficiency_sum(eff) == 0.0);
    // only propagating orders are listed
    for (const auto& [n, e] : eff) CHECK(std::abs(ms->alpha(n)) < 2.5);
}

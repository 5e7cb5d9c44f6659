#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gratlab/stability.hpp"

using namespace gratlab;
using Catch::Approx;

TEST_CASE("envelope: arithmetic on the two branches") {
    const auto a = envelope(4.0, 2.0, 0.5);
    CHECK(a.value == Approx(256.0)); // max(90.51, 256)
    CHECK(a.reduced);                // 0.5 >= 1/(b^2 k) = 1/32
    const auto b = envelope(4.0, 1.0, 1e-4);
    CHECK(b.value == Approx(1600.0)); // max(1600, 32)
    CHECK_FALSE(b.reduced);
    CHECK_THROWS_AS(envelope(4.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("envelope branches cross exactly at eps = 1/(b^2 k)") {
    const double b = 1.0, k = 3.7, eps = 1.0 / (b * b * k);
    CHECK(b * b * k * k / std::sqrt(eps) == Approx(b * b * b * std::pow(k, 2.5)).epsilon(1e-14));
    CHECK(envelope(k, b, eps).reduced); // tie goes to the reduced branch
}

TEST_CASE("envelope monotonicity in k, b and eps") {
    const std::vector<double> ks{2.0, 2.7, 3.5, 8.0, 16.0};
    const std::vector<double> bs{1.0, 1.5, 2.0, 4.0};
    const std::vector<double> es{0.05, 0.2, 0.5, 1.0};
    for (std::size_t i = 1; i < ks.size(); ++i)
        CHECK(envelope(ks[i], 2.0, 0.3).value >= envelope(ks[i - 1], 2.0, 0.3).value);
    for (std::size_t i = 1; i < bs.size(); ++i)
        CHECK(envelope(3.3, bs[i], 0.3).value >= envelope(3.3, bs[i - 1], 0.3).value);
    for (std::size_t i = 1; i < es.size(); ++i)
        CHECK(envelope(3.3, 2.0, es[i]).value <= envelope(3.3, 2.0, es[i - 1]).value);
}

TEST_CASE("default grid rule meets every solver invariant") {
    for (double k : {2.2, 5.0, 12.7, 20.0}) {
        const auto cfg = PlaneWaveConfig::make(k, 0.2, 2 * pi, 2.0);
        const GridSpec g = default_grid_rule(cfg);
        CHECK(g.N >= min_truncation(cfg));
        CHECK(is_power_of_two(g.M));
        CHECK(g.M >= 4 * (2 * g.N + 1));
        CHECK(g.P >= 20.0 * k * cfg.b / (2 * pi));
    }
}

TEST_CASE("fit_exponent: exact power law and constant data") {
    auto synth = [](double expo) {
        std::vector<StabilityRecord> rs;
        for (double k : {2.0, 3.0, 4.5, 6.0, 8.0, 11.0}) {
            StabilityRecord r;
            r.k = k;
            r.quotient = expo == 0.0 ? 7.0 : std::pow(k, expo);
            r.reduced = true;
            rs.push_back(r);
        }
        return rs;
    };
    const auto f2 = fit_exponent(synth(2.0));
    CHECK(f2.slope == Approx(2.0).margin(1e-12));
    CHECK(f2.slope_stderr <= 1e-12);
    const auto f0 = fit_exponent(synth(0.0));
    CHECK(f0.slope == Approx(0.0).margin(1e-12));
}

TEST_CASE("fit_exponent rejects short or off-branch data") {
    std::vector<StabilityRecord> rs(4);
    for (int i = 0; i < 4; ++i) {
        rs[static_cast<std::size_t>(i)].k = 2.0 + i;
        rs[static_cast<std::size_t>(i)].quotient = 1.0;
        rs[static_cast<std::size_t>(i)].reduced = true;
    }
    CHECK_THROWS_AS(fit_exponent(rs), InsufficientData);
    rs.push_back(rs.back());
    rs.back().k = 7.0;
    rs.back().reduced = false;
    CHECK_THROWS_AS(fit_exponent(rs), InsufficientData);
}

TEST_CASE("sweep on the flat grating matches the closed-form quotient") {
    const auto tmpl = PlaneWaveConfig::make(1.0, 0.0, 2 * pi, 1.0);
    const SweepResult res = sweep(tmpl, GratingProfile::flat(2 * pi), {2.3, 2.5, 2.7});
    REQUIRE(res.records.size() == 3);
    for (const auto& r : res.records) {
        CHECK(r.quotient > 0.0);
        CHECK(r.eps >= 0.2);
        // images solution: quotient = sqrt(b/2 + s) + sqrt(b/2 - s),
        // s = sin(2 beta b) / (4 beta)
        const double s = std::sin(2 * r.k) / (4 * r.k);
        const double expect = std::sqrt(0.5 + s) + std::sqrt(0.5 - s);
        // the default rule grid carries ~40 points per wavelength, so the
        // measured quotient sits within O((kh)^2) of the closed form
        CHECK(r.quotient == Approx(expect).epsilon(1e-2));
        CHECK(r.envelope == Approx(envelope(r.k, 1.0, r.eps).value));
        CHECK(r.g_norm == Approx(2 * r.k * std::sqrt(2 * pi)).epsilon(1e-12));
    }
}

TEST_CASE("sweep skips resonant wavenumbers") {
    const auto tmpl = PlaneWaveConfig::make(1.0, 0.0, 2 * pi, 1.0);
    const SweepResult res = sweep(tmpl, GratingProfile::flat(2 * pi), {3.0});
    CHECK(res.records.empty());
    REQUIRE(res.skipped.size() == 1);
    CHECK(res.skipped[0].k == 3.0);
    CHECK(res.skipped[0].eps == Approx(0.0).margin(0));
    CHECK(res.skipped[0].message.empty());
}

TEST_CASE("sweep is deterministic and thread-count independent") {
    const auto tmpl = PlaneWaveConfig::make(1.0, 0.1, 2 * pi, 1.0);
    const std::vector<double> ks{2.3, 2.6, 4.4, 5.5, 6.6};
    SweepOptions s1, s4;
    s1.threads = 1;
    s4.threads = 4;
    const auto r1 = sweep(tmpl, GratingProfile::sinusoid(2 * pi, 0.05), ks, s1);
    const auto r4 = sweep(tmpl, GratingProfile::sinusoid(2 * pi, 0.05), ks, s4);
    CHECK(sweep_csv(r1.records) == sweep_csv(r4.records));
}

namespace {
GridSpec small_grid(const PlaneWaveConfig& cfg) {
    GridSpec g;
    g.N = default_truncation(cfg);
    g.M = next_pow2(2 * (2 * g.N + 1));
    g.P = std::max(16, static_cast<int>(std::ceil(20.0 * cfg.k * cfg.b / (2 * pi))));
    return g;
}
} // namespace

TEST_CASE("monte carlo: degenerate sigma = 0 ensemble reproduces the deterministic run") {
    const auto cfg = PlaneWaveConfig::make(2.5, 0.0, 2 * pi, 1.0);
    const auto model = kl_eigenpairs(0.0, 0.5, 2 * pi, 8);
    McOptions mo;
    mo.grid_rule = small_grid;
    const McResult res = monte_carlo(model, cfg, 8, 42, mo);
    CHECK(res.summary.n_rejected == 0);
    const StabilityRecord det = measure_quotient(cfg, GratingProfile::flat(2 * pi),
                                                 small_grid(cfg), std::min(0.5 * cfg.b, 1.0));
    for (const auto& r : res.records)
        CHECK(std::abs(r.quotient - det.quotient) <= 1e-12 * det.quotient);
    CHECK(std::abs(res.summary.stochastic_quotient - det.quotient) <= 1e-12 * det.quotient);
    CHECK(res.summary.ci95 <= 1e-14 * det.quotient); // summation dust only

}

TEST_CASE("monte carlo is deterministic and thread-count independent") {
    const auto cfg = PlaneWaveConfig::make(2.5, 0.0, 2 * pi, 1.0);
    const auto model = kl_eigenpairs(0.01, 0.5, 2 * pi);
    McOptions m1, m8;
    m1.grid_rule = small_grid;
    m8.grid_rule = small_grid;
    m1.threads = 1;
    m8.threads = 8;
    const McResult r1 = monte_carlo(model, cfg, 12, 777, m1);
    const McResult r8 = monte_carlo(model, cfg, 12, 777, m8);
    CHECK(mc_csv(r1.rows) == mc_csv(r8.rows));
    CHECK(r1.summary.stochastic_quotient == r8.summary.stochastic_quotient);
    CHECK(r1.summary.ci95 == r8.summary.ci95);
}

TEST_CASE("monte carlo: ci95 shrinks like 1/sqrt(2) when n doubles") {
    const auto cfg = PlaneWaveConfig::make(2.5, 0.0, 2 * pi, 1.0);
    const auto model = kl_eigenpairs(0.01, 0.5, 2 * pi);
    McOptions mo;
    mo.grid_rule = small_grid;
    const McResult a = monte_carlo(model, cfg, 32, 2024, mo);
    const McResult b = monte_carlo(model, cfg, 64, 2024, mo);
    CHECK(a.summary.ci95 > 0.0);
    const double ratio = b.summary.ci95 / a.summary.ci95;
    CHECK(ratio == Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("monte carlo rejects an over-tall ensemble") {
    const auto cfg = PlaneWaveConfig::make(2.5, 0.0, 2 * pi, 1.0);
    const auto model = kl_eigenpairs(1.0, 0.5, 2 * pi); // sigma = 1, b = 1: sup >> b/4
    McOptions mo;
    mo.grid_rule = small_grid;
    CHECK_THROWS_AS(monte_carlo(model, cfg, 4, 1, mo), RejectionRateExceeded);
}

TEST_CASE("csv emission formats") {
    StabilityRecord r;
    r.k = 2.5;
    r.theta = 0.0;
    r.b = 1.0;
    r.eps = 0.5;
    r.g_norm = 1.0;
    r.grad_norm = 2.0;
    r.l2_norm = 3.0;
    r.quotient = 9.5;
    r.envelope = 10.0;
    r.reduced = true;
    r.M = 64;
    r.P = 100;
    r.N = 11;
    const std::string csv = sweep_csv({r});
    CHECK(csv.find("k,theta,b,eps,g_norm,grad_norm,l2_norm,quotient,envelope,branch,M,P,N\n") == 0);
    CHECK(csv.find(",reduced,64,100,11\n") != std::string::npos);
    const std::string mc = mc_csv({{0, 99, 1.5, true}, {1, 100, std::nan(""), false}});
    CHECK(mc.find("sample,seed,quotient,accepted\n") == 0);
    CHECK(mc.find("0,99,1.5,1\n") != std::string::npos);
    CHECK(mc.find("1,100,nan,0\n") != std::string::npos);
}

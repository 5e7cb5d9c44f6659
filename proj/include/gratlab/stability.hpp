#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "gratlab/boundary.hpp"
#include "gratlab/errors.hpp"
#include "gratlab/io.hpp"
#include "gratlab/modes.hpp"
#include "gratlab/random_surface.hpp"
#include "gratlab/solver.hpp"

namespace gratlab {

// ---------------------------------------------------------------------------
// Wavenumber sweeps and Monte Carlo campaigns measuring the stability
// quotient (||grad u|| + k ||u||) / ||g|| against the envelope
// max{ b^2 k^2 / sqrt(eps), b^3 k^{5/2} }. The theorems' constant C is
// unspecified, so the harness never asserts an absolute bound; it reports
// quotient/envelope ratios and fitted growth exponents.
// ---------------------------------------------------------------------------

struct EnvelopeResult {
    double value = 0.0;
    bool reduced = false; // true: b^3 k^{5/2} branch active, i.e. eps >= 1/(b^2 k)
};

inline EnvelopeResult envelope(double k, double b, double eps) {
    if (!(eps > 0.0)) throw ValidationError("eps", "> 0");
    const double resonance_branch = b * b * k * k / std::sqrt(eps);
    const double reduced_branch = b * b * b * std::pow(k, 2.5);
    // The larger branch and the Remark crossover eps >= 1/(b^2 k) coincide.
    if (reduced_branch >= resonance_branch) return {reduced_branch, true};
    return {resonance_branch, false};
}

struct GridSpec {
    int N = 0;
    int M = 0;
    int P = 0;
};

inline int next_pow2(int v) {
    int p = 1;
    while (p < v) p *= 2;
    return p;
}

/// Default resolution rule: N = ceil(Lambda k / 2pi) + 8,
/// M = next power of two >= 4(2N+1), P = ceil(40 k b / 2pi).
inline GridSpec default_grid_rule(const PlaneWaveConfig& cfg) {
    GridSpec g;
    g.N = default_truncation(cfg);
    g.M = next_pow2(4 * (2 * g.N + 1));
    g.P = static_cast<int>(std::ceil(40.0 * cfg.k * cfg.b / (2.0 * pi)));
    return g;
}

using GridRule = std::function<GridSpec(const PlaneWaveConfig&)>;

/// Deterministic parallel map: items run on `threads` workers, results land
/// in caller-owned slots indexed by item, so output is identical to a serial
/// run regardless of worker count.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::thread> pool;
    const int t = std::min(threads, n);
    pool.reserve(static_cast<std::size_t>(t));
    for (int w = 0; w < t; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

struct StabilityRecord {
    double k = 0, theta = 0, b = 0, eps = 0;
    double g_norm = 0;
    double grad_norm = 0;
    double l2_norm = 0;
    double quotient = 0;
    double envelope = 0;
    bool reduced = false;
    int M = 0, P = 0, N = 0;
};

struct SweepSkip {
    double k = 0;
    double eps = 0;
    std::string message; // empty: skipped as inadmissible; else captured error
};

struct SweepResult {
    std::vector<StabilityRecord> records;
    std::vector<SweepSkip> skipped;
};

struct SweepOptions {
    double eps_min = 0.2;
    int threads = 1;
    GridRule grid_rule = default_grid_rule;
    double gamma0 = 0.0; // <= 0: default rule
};

/// Solve one configuration and measure its stability record.
inline StabilityRecord measure_quotient(const PlaneWaveConfig& cfg, const GratingProfile& profile,
                                        const GridSpec& grid, double gamma0 = 0.0) {
    auto modes = std::make_shared<const ModeSet>(make_modes(cfg, grid.N));
    auto map = std::make_shared<const FlatteningMap>(
        gamma0 > 0.0 ? make_map(profile, cfg.b, gamma0) : make_map(profile, cfg.b));
    const SolutionField field = solve(assemble(map, SolverGrid{grid.M, grid.P}, modes));
    const auto [grad, l2] = energy_norms(field);

    StabilityRecord r;
    r.k = cfg.k;
    r.theta = cfg.theta;
    r.b = cfg.b;
    r.eps = modes->epsilon;
    r.g_norm = boundary_source(modes).l2_norm(); // = 2 beta sqrt(Lambda)
    r.grad_norm = grad;
    r.l2_norm = l2;
    r.quotient = (grad + cfg.k * l2) / r.g_norm;
    const EnvelopeResult env = envelope(cfg.k, cfg.b, r.eps);
    r.envelope = env.value;
    r.reduced = env.reduced;
    r.M = grid.M;
    r.P = grid.P;
    r.N = grid.N;
    return r;
}

/// Wavenumber sweep over k_grid; inadmissible wavenumbers (resonance distance
/// below eps_min) are skipped and logged, per-record solver errors are
/// captured without aborting the sweep.
inline SweepResult sweep(const PlaneWaveConfig& config_template, const GratingProfile& profile,
                         const std::vector<double>& k_grid, const SweepOptions& opts = {}) {
    if (!(opts.eps_min > 0.0)) throw ValidationError("eps_min", "> 0");
    const int n = static_cast<int>(k_grid.size());
    std::vector<int> status(static_cast<std::size_t>(n), 0); // 0 skip, 1 record, 2 error
    std::vector<StabilityRecord> recs(static_cast<std::size_t>(n));
    std::vector<SweepSkip> skips(static_cast<std::size_t>(n));

    parallel_for(n, opts.threads, [&](int i) {
        const auto si = static_cast<std::size_t>(i);
        PlaneWaveConfig cfg = PlaneWaveConfig::make(k_grid[si], config_template.theta,
                                                    config_template.Lambda, config_template.b);
        const GridSpec grid = opts.grid_rule(cfg);
        const double eps = resonance_distance(cfg, grid.N);
        if (eps < opts.eps_min) {
            skips[si] = {cfg.k, eps, ""};
            status[si] = 0;
            return;
        }
        try {
            recs[si] = measure_quotient(cfg, profile, grid, opts.gamma0);
            status[si] = 1;
        } catch (const Error& e) {
            skips[si] = {cfg.k, eps, e.what()};
            status[si] = 2;
        }
    });

    SweepResult out;
    for (int i = 0; i < n; ++i) {
        const auto si = static_cast<std::size_t>(i);
        if (status[si] == 1)
            out.records.push_back(recs[si]);
        else
            out.skipped.push_back(skips[si]);
    }
    return out;
}

struct ExponentFit {
    double slope = 0.0;
    double slope_stderr = 0.0;
};

/// Least-squares slope of log(quotient) against log(k). Requires at least
/// five records, all on the reduced branch eps >= 1/(b^2 k).
inline ExponentFit fit_exponent(const std::vector<StabilityRecord>& records) {
    if (records.size() < 5)
        throw InsufficientData("fit_exponent needs >= 5 records, got " +
                               std::to_string(records.size()));
    for (const auto& r : records)
        if (!r.reduced)
            throw InsufficientData("fit_exponent requires all records on the reduced branch");
    const auto n = static_cast<double>(records.size());
    double sx = 0, sy = 0;
    for (const auto& r : records) {
        sx += std::log(r.k);
        sy += std::log(r.quotient);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, see = 0;
    for (const auto& r : records) {
        const double dx = std::log(r.k) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(r.quotient) - my);
    }
    if (sxx == 0.0) throw InsufficientData("fit_exponent: degenerate k grid");
    const double slope = sxy / sxx;
    for (const auto& r : records) {
        const double e = (std::log(r.quotient) - my) - slope * (std::log(r.k) - mx);
        see += e * e;
    }
    const double dof = n - 2.0;
    return {slope, dof > 0.0 ? std::sqrt(see / dof / sxx) : 0.0};
}

// --------------------------- Monte Carlo -----------------------------------

struct McRow {
    int sample = 0;
    std::uint64_t seed = 0;
    double quotient = 0.0; // NaN for rejected attempts
    bool accepted = false;
};

struct McSummary {
    int n_samples = 0;
    int n_rejected = 0;
    double mean_sq_grad = 0.0; // sample mean of ||grad u||^2
    double mean_sq_l2 = 0.0;   // sample mean of k^2 ||u||^2
    double stochastic_quotient = 0.0;
    double ci95 = 0.0;
    std::uint64_t seed = 0;
};

struct McResult {
    McSummary summary;
    std::vector<McRow> rows; // one row per attempt, slot-major
    std::vector<StabilityRecord> records;
};

struct McOptions {
    int threads = 1;
    GridRule grid_rule = default_grid_rule;
    int max_attempts_per_slot = 64;
    double max_rejection_rate = 0.2;
};

/// Monte Carlo campaign over KL surface samples: slot i draws from the
/// sub-seed stream (master_seed, i, attempt), screens, solves, and the
/// L2(Omega) norms are aggregated as plain sample means. Deterministic in
/// master_seed regardless of worker count.
inline McResult monte_carlo(const KLModel& model, const PlaneWaveConfig& config, int n_samples,
                            std::uint64_t master_seed, const McOptions& opts = {}) {
    if (n_samples < 2) throw ValidationError("n_samples", ">= 2");
    if (model.Lambda != config.Lambda)
        throw ValidationError("kl.Lambda", "equal to the wave period");

    const GridSpec grid = opts.grid_rule(config);
    const double gamma0 = std::min(0.5 * config.b, 1.0); // screen_sample's rule

    struct Slot {
        std::vector<McRow> rows;
        StabilityRecord rec;
        std::string error;
        bool solver_error = false;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(n_samples));

    parallel_for(n_samples, opts.threads, [&](int i) {
        Slot& s = slots[static_cast<std::size_t>(i)];
        for (int attempt = 0; attempt < opts.max_attempts_per_slot; ++attempt) {
            const std::uint64_t seed =
                sub_seed(master_seed, static_cast<std::uint64_t>(i),
                         static_cast<std::uint64_t>(attempt));
            const GratingProfile surf = sample_surface(model, draw_xi(model, seed));
            const ScreenResult sc = screen_sample(surf, config.b);
            if (!sc.accepted) {
                s.rows.push_back({i, seed, std::nan(""), false});
                continue;
            }
            try {
                s.rec = measure_quotient(config, surf, grid, gamma0);
            } catch (const Error& e) {
                s.error = e.what();
                s.solver_error = true;
                return;
            }
            s.rows.push_back({i, seed, s.rec.quotient, true});
            return;
        }
        s.error = "no admissible sample in " + std::to_string(opts.max_attempts_per_slot) +
                  " attempts";
    });

    McResult out;
    out.summary.seed = master_seed;
    out.summary.n_samples = n_samples;
    std::vector<double> A(static_cast<std::size_t>(n_samples)), B(static_cast<std::size_t>(n_samples));
    int rejected = 0;
    for (int i = 0; i < n_samples; ++i) {
        Slot& s = slots[static_cast<std::size_t>(i)];
        rejected += static_cast<int>(s.rows.size()) - (s.error.empty() ? 1 : 0);
        for (const auto& r : s.rows) out.rows.push_back(r);
        if (s.solver_error)
            throw SingularSystem("sample slot " + std::to_string(i) + ": " + s.error);
        if (!s.error.empty())
            throw RejectionRateExceeded("sample slot " + std::to_string(i) + ": " + s.error);
        out.records.push_back(s.rec);
        A[static_cast<std::size_t>(i)] = s.rec.grad_norm * s.rec.grad_norm;
        B[static_cast<std::size_t>(i)] =
            config.k * config.k * s.rec.l2_norm * s.rec.l2_norm;
    }
    out.summary.n_rejected = rejected;
    if (static_cast<double>(rejected) > opts.max_rejection_rate * n_samples)
        throw RejectionRateExceeded("rejected " + std::to_string(rejected) + " of " +
                                    std::to_string(n_samples) + " samples (> " +
                                    fmt_double_short(opts.max_rejection_rate * 100) + "%)");

    const double n = static_cast<double>(n_samples);
    double mA = 0, mB = 0;
    for (int i = 0; i < n_samples; ++i) {
        mA += A[static_cast<std::size_t>(i)];
        mB += B[static_cast<std::size_t>(i)];
    }
    mA /= n;
    mB /= n;
    out.summary.mean_sq_grad = mA;
    out.summary.mean_sq_l2 = mB;
    const double g_norm = out.records.front().g_norm;
    out.summary.stochastic_quotient = (std::sqrt(mA) + std::sqrt(mB)) / g_norm;

    // Delta-method half-width for (sqrt(A) + sqrt(B))/g from the sample
    // covariance of the per-sample squares.
    if (mA > 0.0 && mB > 0.0) {
        double vA = 0, vB = 0, cAB = 0;
        for (int i = 0; i < n_samples; ++i) {
            const double da = A[static_cast<std::size_t>(i)] - mA;
            const double db = B[static_cast<std::size_t>(i)] - mB;
            vA += da * da;
            vB += db * db;
            cAB += da * db;
        }
        const double dof = n - 1.0;
        vA /= dof;
        vB /= dof;
        cAB /= dof;
        const double var_q = (vA / (4.0 * mA) + vB / (4.0 * mB) +
                              2.0 * cAB / (4.0 * std::sqrt(mA * mB))) /
                             (n * g_norm * g_norm);
        out.summary.ci95 = 1.96 * std::sqrt(std::max(0.0, var_q));
    }
    return out;
}

// ----------------------------- CSV emission --------------------------------

inline std::string sweep_csv(const std::vector<StabilityRecord>& records) {
    std::string s = "k,theta,b,eps,g_norm,grad_norm,l2_norm,quotient,envelope,branch,M,P,N\n";
    for (const auto& r : records) {
        s += fmt_double(r.k) + ',' + fmt_double(r.theta) + ',' + fmt_double(r.b) + ',' +
             fmt_double(r.eps) + ',' + fmt_double(r.g_norm) + ',' + fmt_double(r.grad_norm) +
             ',' + fmt_double(r.l2_norm) + ',' + fmt_double(r.quotient) + ',' +
             fmt_double(r.envelope) + ',' + (r.reduced ? "reduced" : "resonance") + ',' +
             std::to_string(r.M) + ',' + std::to_string(r.P) + ',' + std::to_string(r.N) + '\n';
    }
    return s;
}

inline std::string mc_csv(const std::vector<McRow>& rows) {
    std::string s = "sample,seed,quotient,accepted\n";
    for (const auto& r : rows) {
        s += std::to_string(r.sample) + ',' + std::to_string(r.seed) + ',' +
             (std::isnan(r.quotient) ? std::string("nan") : fmt_double(r.quotient)) + ',' +
             (r.accepted ? '1' : '0');
        s += '\n';
    }
    return s;
}

} // namespace gratlab

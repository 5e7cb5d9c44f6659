#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "gratlab/config.hpp"
#include "gratlab/io.hpp"
#include "gratlab/random_surface.hpp"
#include "gratlab/solver.hpp"
#include "gratlab/stability.hpp"

namespace gratlab {

struct RunOptions {
    std::string out_dir;            // overrides config when non-empty
    int threads = 1;
    std::optional<std::uint64_t> seed; // overrides config when set
};

namespace detail {

inline GratingProfile profile_from_spec(const ProfileSpec& ps, double Lambda,
                                        std::uint64_t seed, KLModel* model_out = nullptr) {
    if (ps.kind == "flat") return GratingProfile::flat(Lambda);
    if (ps.kind == "trig")
        return GratingProfile::trig(Lambda, ps.a0, ps.cos_coeffs, ps.sin_coeffs);
    if (ps.kind == "samples") return GratingProfile::samples(Lambda, ps.values);
    // kl: one surface drawn from the slot-0 stream
    GratingProfile mean = GratingProfile::trig(Lambda, ps.mean_a0, ps.mean_cos, ps.mean_sin);
    KLModel model = kl_eigenpairs(std::move(mean), ps.sigma, ps.ell, ps.J);
    if (model_out) *model_out = model;
    return sample_surface(model, draw_xi(model, sub_seed(seed, 0)));
}

inline GridSpec resolve_grid(const RunConfig& c, const PlaneWaveConfig& cfg) {
    GridSpec g = default_grid_rule(cfg);
    if (c.N > 0) g.N = c.N;
    if (c.M > 0) g.M = c.M;
    if (c.P > 0) g.P = c.P;
    return g;
}

inline std::string field_csv(const SolutionField& field) {
    const auto& cfg = field.config();
    const int M = field.grid.M, P = field.grid.P;
    std::string s = "y1,y2,re_u,im_u\n";
    for (int p = 0; p <= P; ++p) {
        const double y2 = cfg.b * static_cast<double>(p) / static_cast<double>(P);
        for (int j = 0; j < M; ++j) {
            const double y1 = cfg.Lambda * static_cast<double>(j) / static_cast<double>(M);
            s += fmt_double(y1) + ',' + fmt_double(y2) + ',' +
                 fmt_double(field.values(j, p).real()) + ',' +
                 fmt_double(field.values(j, p).imag()) + '\n';
        }
    }
    return s;
}

inline std::string trace_csv(const BoundaryTrace& t) {
    std::string s = "n,re,im\n";
    for (long n = -t.modes->N; n <= t.modes->N; ++n) {
        const auto c = t.coeff(n);
        s += std::to_string(n) + ',' + fmt_double(c.real()) + ',' + fmt_double(c.imag()) + '\n';
    }
    return s;
}

inline std::string efficiency_csv(const SolutionField& field) {
    const auto eff = field_efficiencies(field);
    std::string s = "n,alpha_n,efficiency\n";
    for (const auto& [n, e] : eff)
        s += std::to_string(n) + ',' + fmt_double(field.modes->alpha(n)) + ',' + fmt_double(e) +
             '\n';
    return s;
}

} // namespace detail

/// Execute a parsed run configuration; writes all declared outputs atomically
/// plus a JSON run manifest. Throws library errors; see run() for the exit
/// code mapping.
inline void run_checked(const RunConfig& cfg_in, const RunOptions& opts = {}) {
    namespace fs = std::filesystem;
    RunConfig c = cfg_in;
    if (!opts.out_dir.empty()) c.out_dir = opts.out_dir;
    if (opts.seed) c.seed = *opts.seed;
    const fs::path dir = c.out_dir;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> outputs;

    auto emit = [&](const std::string& name, const std::string& content) {
        atomic_write_file(dir / name, content);
        outputs.push_back(name);
    };

    switch (c.command) {
        case Command::Solve:
        case Command::Efficiency: {
            const PlaneWaveConfig wave = PlaneWaveConfig::make(c.k, c.theta, c.Lambda, c.b);
            const GratingProfile prof = detail::profile_from_spec(c.profile, c.Lambda, c.seed);
            const GridSpec grid = detail::resolve_grid(c, wave);
            auto modes = std::make_shared<const ModeSet>(make_modes(wave, grid.N));
            if (!is_admissible(wave, grid.N, c.eps_min))
                throw SingularSystem("k = " + fmt_double_short(c.k) +
                                     " is inadmissible: resonance distance " +
                                     fmt_double_short(modes->epsilon) + " < eps_min " +
                                     fmt_double_short(c.eps_min));
            auto map = std::make_shared<const FlatteningMap>(
                c.gamma0 > 0.0 ? make_map(prof, c.b, c.gamma0) : make_map(prof, c.b));
            const SolutionField field = solve(assemble(map, SolverGrid{grid.M, grid.P}, modes));
            if (c.command == Command::Solve) {
                const std::string fname =
                    "field_k" + fmt_double_short(c.k) + "_seed" + std::to_string(c.seed) + ".csv";
                emit(fname, detail::field_csv(field));
                auto [dirich, neum] = boundary_traces(field);
                emit("trace_dirichlet.csv", detail::trace_csv(dirich));
                emit("trace_neumann.csv", detail::trace_csv(neum));
            } else {
                emit("efficiency.csv", detail::efficiency_csv(field));
                std::cout << "efficiency sum = "
                          << fmt_double(efficiency_sum(field_efficiencies(field))) << "\n";
            }
            break;
        }
        case Command::Sweep: {
            const PlaneWaveConfig tmpl = PlaneWaveConfig::make(c.k_grid.front(), c.theta,
                                                               c.Lambda, c.b);
            const GratingProfile prof = detail::profile_from_spec(c.profile, c.Lambda, c.seed);
            SweepOptions so;
            so.eps_min = c.eps_min;
            so.threads = opts.threads;
            so.gamma0 = c.gamma0;
            if (c.N > 0 || c.M > 0 || c.P > 0) {
                const RunConfig cc = c;
                so.grid_rule = [cc](const PlaneWaveConfig& w) {
                    return detail::resolve_grid(cc, w);
                };
            }
            const SweepResult res = sweep(tmpl, prof, c.k_grid, so);
            for (const auto& s : res.skipped)
                std::cerr << "sweep: skipped k = " << fmt_double_short(s.k)
                          << (s.message.empty()
                                  ? " (inadmissible, eps = " + fmt_double_short(s.eps) + ")"
                                  : " (" + s.message + ")")
                          << "\n";
            emit("sweep.csv", sweep_csv(res.records));
            if (c.fit_exponent) {
                std::vector<StabilityRecord> reduced;
                for (const auto& r : res.records)
                    if (r.reduced) reduced.push_back(r);
                const ExponentFit fit = fit_exponent(reduced);
                std::cout << "fitted exponent = " << fmt_double(fit.slope) << " +/- "
                          << fmt_double(fit.slope_stderr) << "\n";
            }
            break;
        }
        case Command::Mc: {
            const PlaneWaveConfig wave = PlaneWaveConfig::make(c.k, c.theta, c.Lambda, c.b);
            GratingProfile mean =
                GratingProfile::trig(c.Lambda, c.profile.mean_a0, c.profile.mean_cos,
                                     c.profile.mean_sin);
            const KLModel model =
                kl_eigenpairs(std::move(mean), c.profile.sigma, c.profile.ell, c.profile.J);
            McOptions mo;
            mo.threads = opts.threads;
            const RunConfig cc = c;
            mo.grid_rule = [cc](const PlaneWaveConfig& w) { return detail::resolve_grid(cc, w); };
            const McResult res = monte_carlo(model, wave, c.n_samples, c.seed, mo);
            emit("mc.csv", mc_csv(res.rows));
            std::cout << "mc: n = " << res.summary.n_samples
                      << ", rejected = " << res.summary.n_rejected
                      << ", stochastic quotient = " << fmt_double(res.summary.stochastic_quotient)
                      << " +/- " << fmt_double(res.summary.ci95) << " (95%)\n";
            break;
        }
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nlohmann::json manifest;
    manifest["config"] = config_to_json(c);
    manifest["seed"] = c.seed;
    manifest["threads"] = opts.threads;
    manifest["versions"] = {{"gratlab", "0.1.0"},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                          std::to_string(EIGEN_MINOR_VERSION)}};
    manifest["wall_time_s"] = wall;
    manifest["outputs"] = outputs;
    atomic_write_file(dir / "run_manifest.json", manifest.dump(2) + "\n");
}

/// Exit codes: 0 ok, 1 parse/validation, 2 rejection rate exceeded,
/// 3 insufficient data, 4 solver failure.
inline int run(const RunConfig& cfg, const RunOptions& opts = {}) {
    try {
        run_checked(cfg, opts);
        return 0;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const RejectionRateExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InsufficientData& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}

} // namespace gratlab

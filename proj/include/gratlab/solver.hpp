#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "gratlab/boundary.hpp"
#include "gratlab/errors.hpp"
#include "gratlab/modes.hpp"
#include "gratlab/transform.hpp"

namespace gratlab {

// ---------------------------------------------------------------------------
// Discretization of the transformed Helmholtz problem on the reference
// rectangle [0, Lambda] x [0, b]:
//
//   - d_j( detJ b_ij d_i u ) = k^2 detJ u     in the rectangle,
//   u = 0                                     on the bottom edge,
//   d_nu u = T u + g                          on the top edge (map = identity),
//
// for the periodic unknown w with u = e^{i alpha y1} w (quasi-periodicity is
// exact by the substitution). y1 is discretized by Fourier collocation on M
// points, so the DtN operator T is exactly representable as a circulant
// Fourier multiplier (i beta_m at every resolvable frequency); y2 by
// second-order centered differences on P intervals, with the conservative
// half-point form for the d_2(c22 d_2) term and a one-sided second-order
// stencil for the boundary derivative at the top.
//
// The unknown vector is ordered level by level: index p*M + j for node
// (x_j, y_p). Interior rows couple levels p-1, p, p+1 with dense M x M blocks
// below the cutoff height gamma0 and diagonal off-blocks above it, where the
// map is the identity.
// ---------------------------------------------------------------------------

struct SolverGrid {
    int M = 0; // x1 collocation points, power of two, >= 2(2N+1)
    int P = 0; // x2 intervals, >= 20 points per vertical wavelength

    double h2(double b) const { return b / static_cast<double>(P); }
};

inline bool is_power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

inline void validate_grid(const SolverGrid& grid, const ModeSet& modes) {
    const auto& cfg = modes.config;
    if (!is_power_of_two(grid.M))
        throw GridTooCoarse("M = " + std::to_string(grid.M) + " is not a power of two");
    if (grid.M < 2 * (2 * modes.N + 1))
        throw GridTooCoarse("M = " + std::to_string(grid.M) + " < 2(2N+1) = " +
                            std::to_string(2 * (2 * modes.N + 1)) + "; DtN modes would alias");
    const double pmin = 20.0 * cfg.k * cfg.b / (2.0 * pi);
    if (static_cast<double>(grid.P) < pmin - 1e-12)
        throw GridTooCoarse("P = " + std::to_string(grid.P) + " < " + std::to_string(pmin) +
                            " (20 points per vertical wavelength)");
}

namespace detail {

/// DFT frequency of index j on an M-point grid, j in [0, M).
inline long dft_freq(int j, int M) { return j < M / 2 ? j : j - M; }

/// Circulant matrix from a Fourier multiplier: A = F^{-1} diag(mult_m) F,
/// built from its first column. A[j][l] = col[(j - l) mod M].
inline Eigen::MatrixXcd circulant_from_multiplier(const Eigen::VectorXcd& mult, int M) {
    Eigen::VectorXcd col(M);
    for (int d = 0; d < M; ++d) {
        std::complex<double> s = 0.0;
        for (int j = 0; j < M; ++j) {
            const double ang = 2.0 * pi * static_cast<double>(dft_freq(j, M)) *
                               static_cast<double>(d) / static_cast<double>(M);
            s += mult[j] * std::exp(std::complex<double>(0.0, ang));
        }
        col[d] = s / static_cast<double>(M);
    }
    Eigen::MatrixXcd A(M, M);
    for (int j = 0; j < M; ++j)
        for (int l = 0; l < M; ++l) A(j, l) = col[(j - l + M) % M];
    return A;
}

/// Forward DFT coefficients hat v_m = (1/M) sum_j v_j e^{-2 pi i m j / M}.
inline std::complex<double> dft_coeff(const Eigen::VectorXcd& v, long m) {
    const int M = static_cast<int>(v.size());
    std::complex<double> s = 0.0;
    for (int j = 0; j < M; ++j) {
        const double ang = -2.0 * pi * static_cast<double>(m) * static_cast<double>(j) /
                           static_cast<double>(M);
        s += v[j] * std::exp(std::complex<double>(0.0, ang));
    }
    return s / static_cast<double>(M);
}

} // namespace detail

struct LinearSystem {
    Eigen::SparseMatrix<std::complex<double>> A;
    Eigen::VectorXcd rhs;
    SolverGrid grid;
    std::shared_ptr<const ModeSet> modes;
    std::shared_ptr<const FlatteningMap> map;
};

/// Total field on the reference-rectangle grid, values(j, p) = u(x_j, y_p).
struct SolutionField {
    SolverGrid grid;
    std::shared_ptr<const FlatteningMap> map;
    std::shared_ptr<const ModeSet> modes;
    Eigen::MatrixXcd values;   // M x (P+1), total field u
    Eigen::MatrixXcd periodic; // M x (P+1), the periodic unknown w

    const PlaneWaveConfig& config() const { return modes->config; }
};

inline LinearSystem assemble(std::shared_ptr<const FlatteningMap> map,
                             const SolverGrid& grid,
                             std::shared_ptr<const ModeSet> modes) {
    validate_grid(grid, *modes);
    const auto& cfg = modes->config;
    if (map->b() != cfg.b)
        throw ValidationError("map.b", "equal to the configured boundary height b");
    if (!(cfg.b > map->profile().sup_bound()))
        throw ValidationError("b", "> sup|f| of the profile");

    const int M = grid.M;
    const int P = grid.P;
    const double h = grid.h2(cfg.b);
    const double Lam = cfg.Lambda;
    const double g0 = map->gamma0();
    const GratingProfile& f = map->profile();
    using C = std::complex<double>;

    // Collocation samples of the profile.
    Eigen::VectorXd fv(M), fpv(M);
    for (int j = 0; j < M; ++j) {
        const double x = Lam * static_cast<double>(j) / static_cast<double>(M);
        fv[j] = f.eval(x);
        fpv[j] = f.deriv(x);
    }

    // Shifted spectral derivative (D + i alpha) and its square as circulant
    // Fourier multipliers; the DtN block likewise.
    Eigen::VectorXcd m1(M), m2(M), mt(M);
    for (int j = 0; j < M; ++j) {
        const long m = detail::dft_freq(j, M);
        const double am = cfg.alpha + 2.0 * pi * static_cast<double>(m) / Lam;
        m1[j] = C(0.0, am);
        m2[j] = C(-am * am, 0.0);
        mt[j] = C(0.0, 1.0) * beta_n(cfg, m);
    }
    const Eigen::MatrixXcd D1 = detail::circulant_from_multiplier(m1, M);
    const Eigen::MatrixXcd D2 = detail::circulant_from_multiplier(m2, M);
    const Eigen::MatrixXcd Tdtn = detail::circulant_from_multiplier(mt, M);

    // Separable pieces of the variable coefficients:
    //   c11(x,y) = 1 + a'(y) f(x),  c12(x,y) = -a(y) f'(x),
    // so D (c11 .) D = D2 + a'(y) * (D F D) and the mixed-term factors are
    // scaled copies of D1 Fp and Fp D1.
    const Eigen::MatrixXcd DFD = D1 * (fv.asDiagonal() * D1);
    const Eigen::MatrixXcd D1Fp = D1 * fpv.asDiagonal();
    const Eigen::MatrixXcd FpD1 = fpv.asDiagonal() * D1;

    const bool flat = f.is_identically_zero();
    auto cut = [&](double y) { return cutoff_alpha(y, g0); };
    auto cutp = [&](double y) { return cutoff_alpha_deriv(y, g0); };
    auto c22 = [&](int j, double y) {
        const double c = cut(y) * fpv[j];
        return (1.0 + c * c) / (1.0 + cutp(y) * fv[j]);
    };

    // Count nonzeros exactly: dense blocks only where the cutoff is active.
    const auto level_active = [&](int p) {
        const double y = static_cast<double>(p) * h;
        return !flat && y < g0;
    };
    std::size_t nnz = static_cast<std::size_t>(M); // Dirichlet rows
    for (int p = 1; p < P; ++p) {
        nnz += static_cast<std::size_t>(M) * static_cast<std::size_t>(M); // diag block dense (D2)
        for (int dp : {-1, 1})
            nnz += (level_active(p) || level_active(p + dp))
                       ? static_cast<std::size_t>(M) * static_cast<std::size_t>(M)
                       : static_cast<std::size_t>(M);
    }
    nnz += static_cast<std::size_t>(M) * static_cast<std::size_t>(M) + 2u * static_cast<std::size_t>(M);

    std::vector<Eigen::Triplet<C>> trips;
    trips.reserve(nnz);
    auto add_block = [&](int prow, int pcol, const Eigen::MatrixXcd& B) {
        for (int l = 0; l < M; ++l)
            for (int j = 0; j < M; ++j)
                trips.emplace_back(prow * M + j, pcol * M + l, B(j, l));
    };
    auto add_diag = [&](int prow, int pcol, const Eigen::VectorXcd& d) {
        for (int j = 0; j < M; ++j) trips.emplace_back(prow * M + j, pcol * M + j, d[j]);
    };

    // Bottom: w = 0.
    for (int j = 0; j < M; ++j) trips.emplace_back(j, j, C(1.0, 0.0));

    // Interior rows carry a factor h^2 and the top rows a factor h so that
    // every row is O(1); the solution is unchanged and the factorization
    // residual stays clean relative to the scaled right-hand side.
    const double h2s = h * h;
    Eigen::MatrixXcd block(M, M);
    Eigen::VectorXcd diag(M);
    for (int p = 1; p < P; ++p) {
        const double y = static_cast<double>(p) * h;
        const double ym = y - 0.5 * h, yp = y + 0.5 * h;

        // (p, p): -D(c11 .)D + conservative and mass diagonals
        block = -D2;
        if (cutp(y) != 0.0) block.noalias() -= cutp(y) * DFD;
        for (int j = 0; j < M; ++j) {
            const double detj = 1.0 + cutp(y) * fv[j];
            diag[j] = C((c22(j, yp) + c22(j, ym)) / (h * h) - cfg.k * cfg.k * detj, 0.0);
        }
        block += diag.asDiagonal();
        add_block(p, p, h2s * block);

        // (p, p +/- 1)
        for (int dp : {1, -1}) {
            const int q = p + dp;
            const double yq = static_cast<double>(q) * h;
            const double sgn = static_cast<double>(dp);
            const double ay = cut(y), aq = cut(yq);
            if (level_active(p) || level_active(q)) {
                block.setZero();
                if (ay != 0.0) block.noalias() += (sgn * ay / (2.0 * h)) * D1Fp;
                if (aq != 0.0) block.noalias() += (sgn * aq / (2.0 * h)) * FpD1;
                for (int j = 0; j < M; ++j)
                    block(j, j) -= c22(j, dp > 0 ? yp : ym) / (h * h);
                add_block(p, q, h2s * block);
            } else {
                for (int j = 0; j < M; ++j) diag[j] = C(-h2s / (h * h), 0.0);
                add_diag(p, q, diag);
            }
        }
    }

    // Top: one-sided second-order derivative = T u + g, i.e.
    // (3 w_P - 4 w_{P-1} + w_{P-2}) / (2h) - Tdtn w_P = e^{-i alpha x} g,
    // scaled by h.
    block = -h * Tdtn;
    for (int j = 0; j < M; ++j) block(j, j) += h * 3.0 / (2.0 * h);
    add_block(P, P, block);
    for (int j = 0; j < M; ++j) diag[j] = C(-h * 4.0 / (2.0 * h), 0.0);
    add_diag(P, P - 1, diag);
    for (int j = 0; j < M; ++j) diag[j] = C(h * 1.0 / (2.0 * h), 0.0);
    add_diag(P, P - 2, diag);

    LinearSystem sys;
    sys.grid = grid;
    sys.modes = std::move(modes);
    sys.map = std::move(map);
    const int n = M * (P + 1);
    sys.A.resize(n, n);
    sys.A.setFromTriplets(trips.begin(), trips.end());
    trips.clear();
    trips.shrink_to_fit();
    sys.A.makeCompressed();

    sys.rhs = Eigen::VectorXcd::Zero(n);
    const C gval = h * C(0.0, -2.0 * cfg.beta) * std::exp(C(0.0, -cfg.beta * cfg.b));
    for (int j = 0; j < M; ++j) sys.rhs[P * M + j] = gval;
    return sys;
}

inline LinearSystem assemble(const GratingProfile& profile, const SolverGrid& grid,
                             std::shared_ptr<const ModeSet> modes) {
    auto map = std::make_shared<const FlatteningMap>(make_map(profile, modes->config.b));
    return assemble(std::move(map), grid, std::move(modes));
}

/// Direct sparse factorization solve. Residual ||Ax - b|| / ||b|| must reach
/// 1e-10 (one iterative-refinement pass is applied first); otherwise the
/// system is flagged as singular, which indicates a discrete resonance or a
/// near-resonant wavenumber.
inline SolutionField solve(const LinearSystem& sys) {
    using C = std::complex<double>;
    Eigen::SparseLU<Eigen::SparseMatrix<C>> lu;
    lu.compute(sys.A);
    if (lu.info() != Eigen::Success)
        throw SingularSystem("sparse LU factorization failed (discrete resonance?)");
    Eigen::VectorXcd x = lu.solve(sys.rhs);
    const double bnorm = sys.rhs.norm();
    if (bnorm > 0.0) {
        Eigen::VectorXcd r = sys.rhs - sys.A * x;
        x += lu.solve(r);
        r = sys.rhs - sys.A * x;
        if (!(r.norm() / bnorm <= 1e-10))
            throw SingularSystem("solver residual " + std::to_string(r.norm() / bnorm) +
                                 " exceeds 1e-10; re-check admissibility");
    }

    const auto& cfg = sys.modes->config;
    const int M = sys.grid.M, P = sys.grid.P;
    SolutionField field;
    field.grid = sys.grid;
    field.map = sys.map;
    field.modes = sys.modes;
    field.periodic.resize(M, P + 1);
    field.values.resize(M, P + 1);
    for (int p = 0; p <= P; ++p)
        for (int j = 0; j < M; ++j)
            field.periodic(j, p) = (p == 0) ? C(0.0, 0.0) : x[p * M + j];
    for (int j = 0; j < M; ++j) {
        const double x1 = cfg.Lambda * static_cast<double>(j) / static_cast<double>(M);
        const C phase = std::exp(C(0.0, cfg.alpha * x1));
        for (int p = 0; p <= P; ++p) field.values(j, p) = phase * field.periodic(j, p);
    }
    return field;
}

inline SolutionField solve_grating(std::shared_ptr<const FlatteningMap> map,
                                   const SolverGrid& grid,
                                   std::shared_ptr<const ModeSet> modes) {
    return solve(assemble(std::move(map), grid, std::move(modes)));
}

namespace detail {

/// Vertical derivative of the periodic unknown, fourth order everywhere
/// (centered inside, biased stencils near the edges) so the energy
/// integrals are limited by the field accuracy, not by this stencil.
inline Eigen::MatrixXcd d2_of(const Eigen::MatrixXcd& w, double h) {
    const auto M = w.rows();
    const auto P = w.cols() - 1;
    Eigen::MatrixXcd d(M, P + 1);
    const double s = 1.0 / (12.0 * h);
    d.col(0) = s * (-25.0 * w.col(0) + 48.0 * w.col(1) - 36.0 * w.col(2) + 16.0 * w.col(3) -
                    3.0 * w.col(4));
    d.col(1) = s * (-3.0 * w.col(0) - 10.0 * w.col(1) + 18.0 * w.col(2) - 6.0 * w.col(3) +
                    w.col(4));
    for (Eigen::Index p = 2; p + 2 <= P; ++p)
        d.col(p) = s * (-w.col(p + 2) + 8.0 * w.col(p + 1) - 8.0 * w.col(p - 1) + w.col(p - 2));
    d.col(P - 1) = -s * (-3.0 * w.col(P) - 10.0 * w.col(P - 1) + 18.0 * w.col(P - 2) -
                         6.0 * w.col(P - 3) + w.col(P - 4));
    d.col(P) = -s * (-25.0 * w.col(P) + 48.0 * w.col(P - 1) - 36.0 * w.col(P - 2) +
                     16.0 * w.col(P - 3) - 3.0 * w.col(P - 4));
    return d;
}

} // namespace detail

/// Energy integrals in physical coordinates, evaluated on the reference grid:
///   ||grad u||^2 = int ( c11 |d1 w|^2 + 2 c12 Re(d1 w conj(d2 w)) + c22 |d2 w|^2 ) dy
///   ||u||^2      = int detJ |w|^2 dy
/// (spectral quadrature in y1, trapezoid in y2). Returns (||grad u||, ||u||).
inline std::pair<double, double> energy_norms(const SolutionField& field) {
    const auto& cfg = field.config();
    const int M = field.grid.M, P = field.grid.P;
    const double h = field.grid.h2(cfg.b);
    const double Lam = cfg.Lambda;

    Eigen::VectorXcd m1(M);
    for (int j = 0; j < M; ++j) {
        const long m = detail::dft_freq(j, M);
        m1[j] = std::complex<double>(0.0, cfg.alpha + 2.0 * pi * static_cast<double>(m) / Lam);
    }
    const Eigen::MatrixXcd D1 = detail::circulant_from_multiplier(m1, M);

    const Eigen::MatrixXcd dw1 = D1 * field.periodic;
    const Eigen::MatrixXcd dw2 = detail::d2_of(field.periodic, h);

    double grad2 = 0.0, l22 = 0.0;
    for (int p = 0; p <= P; ++p) {
        const double y = static_cast<double>(p) * h;
        const double wy = (p == 0 || p == P) ? 0.5 * h : h;
        double gsum = 0.0, lsum = 0.0;
        for (int j = 0; j < M; ++j) {
            const double x = Lam * static_cast<double>(j) / static_cast<double>(M);
            double c11, c12, c22;
            field.map->weak_coeffs(x, y, c11, c12, c22);
            const std::complex<double> a = dw1(j, p), b = dw2(j, p);
            gsum += c11 * std::norm(a) + 2.0 * c12 * (a * std::conj(b)).real() + c22 * std::norm(b);
            lsum += c11 * std::norm(field.periodic(j, p)); // c11 = detJ
        }
        grad2 += wy * gsum;
        l22 += wy * lsum;
    }
    const double dx = Lam / static_cast<double>(M);
    return {std::sqrt(grad2 * dx), std::sqrt(l22 * dx)};
}

/// Dirichlet and Neumann traces of the solved field on Gamma, truncated to
/// the mode set: hat u_n of the top row and of the one-sided derivative
/// stencil. The assembled top rows enforce
/// neumann = apply_dtn(dirichlet) + g up to the solver residual.
inline std::pair<BoundaryTrace, BoundaryTrace> boundary_traces(const SolutionField& field) {
    const int M = field.grid.M, P = field.grid.P;
    const double h = field.grid.h2(field.config().b);
    const Eigen::VectorXcd top = field.periodic.col(P);
    const Eigen::VectorXcd dtop =
        (3.0 * field.periodic.col(P) - 4.0 * field.periodic.col(P - 1) + field.periodic.col(P - 2)) /
        (2.0 * h);

    BoundaryTrace dir = BoundaryTrace::zero(field.modes);
    BoundaryTrace neu = BoundaryTrace::zero(field.modes);
    for (long n = -field.modes->N; n <= field.modes->N; ++n) {
        dir.coeff(n) = detail::dft_coeff(top, n);
        neu.coeff(n) = detail::dft_coeff(dtop, n);
    }
    return {std::move(dir), std::move(neu)};
}

/// Trace of the incident wave on Gamma: single n = 0 coefficient e^{-i beta b}.
inline BoundaryTrace incident_trace(std::shared_ptr<const ModeSet> modes) {
    BoundaryTrace t = BoundaryTrace::zero(std::move(modes));
    const auto& cfg = t.modes->config;
    t.coeff(0) = std::exp(std::complex<double>(0.0, -cfg.beta * cfg.b));
    return t;
}

/// Efficiencies of a solved field: Rayleigh amplitudes of the scattered
/// trace (total minus incident), weighted by the propagating flux.
inline std::map<long, double> field_efficiencies(const SolutionField& field) {
    auto [dir, neu] = boundary_traces(field);
    (void)neu;
    BoundaryTrace scattered = dir;
    scattered.coeffs -= incident_trace(field.modes).coeffs;
    return efficiencies(rayleigh_amplitudes(scattered));
}

} // namespace gratlab

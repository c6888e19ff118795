// lindblad.hpp: Liouvillian superoperator, steady-state density matrix with
// adaptive Fock truncation, and photon-correlation observables.
//
// Vectorization is column-major: vec(rho)[k*d + i] = rho(i, k), so that
// vec(A rho B) = (B^T kron A) vec(rho).

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "wgm/errors.hpp"
#include "wgm/fock.hpp"
#include "wgm/meanfield.hpp"
#include "wgm/model.hpp"

namespace wgm {

struct Superoperator {
    std::vector<int> dims;   // of the underlying Hilbert space
    SparseMatrix data;       // d^2 x d^2

    Eigen::Index dim() const { return product_of(dims); }

    DenseMatrix apply(const DenseMatrix& rho) const {
        const Eigen::Index d = dim();
        const DenseVector v = Eigen::Map<const DenseVector>(rho.data(), d * d);
        const DenseVector out = data * v;
        return Eigen::Map<const DenseMatrix>(out.data(), d, d);
    }
};

struct CollapseChannel {
    FockOperator op;
    double rate{0.0};
};

enum class CommutatorForm {
    Verbatim,      // -i (H rho - rho H) with H exactly as built
    HermitianPart  // H replaced by (H + H^dagger)/2
};

inline std::string to_string(CommutatorForm f) {
    return f == CommutatorForm::Verbatim ? "verbatim" : "hermitian_part";
}

// rho -> -i[H, rho] + sum_k rate_k (x rho x^+ - x^+x rho / 2 - rho x^+x / 2)
inline Superoperator build_liouvillian(const FockOperator& h, const std::vector<CollapseChannel>& channels,
                                       CommutatorForm form = CommutatorForm::Verbatim) {
    if (h.data.rows() != h.data.cols()) {
        throw DimensionMismatch("build_liouvillian: Hamiltonian is not square");
    }
    const Eigen::Index d = h.size();
    SparseMatrix id(d, d);
    id.setIdentity();

    SparseMatrix hh = h.data;
    if (form == CommutatorForm::HermitianPart) {
        hh = 0.5 * (h.data + SparseMatrix(h.data.adjoint()));
    }
    const SparseMatrix ht = hh.transpose();
    SparseMatrix l = -kI * (kron(id, hh) - kron(ht, id));

    for (const auto& ch : channels) {
        if (ch.op.dims != h.dims) {
            throw DimensionMismatch("build_liouvillian: collapse operator dims differ from Hamiltonian");
        }
        if (ch.rate < 0.0) {
            throw InvalidParameter("build_liouvillian: negative collapse rate");
        }
        if (ch.rate == 0.0) continue;
        const SparseMatrix& x = ch.op.data;
        const SparseMatrix xdx = SparseMatrix(x.adjoint()) * x;
        const SparseMatrix xdx_t = xdx.transpose();
        const SparseMatrix x_conj = x.conjugate();
        l += ch.rate * (kron(x_conj, x) - 0.5 * kron(id, xdx) - 0.5 * kron(xdx_t, id));
    }
    l.prune(Complex{0.0, 0.0});
    l.makeCompressed();
    return {h.dims, std::move(l)};
}

enum class LinearSolver {
    Iterative,  // restarted GMRES with an excitation-sector preconditioner, direct fallback
    Direct      // sparse LU with COLAMD ordering
};

namespace detail {

// Excitation number of each basis state of a multi-mode Fock space.
inline std::vector<int> excitation_numbers(const std::vector<int>& dims) {
    const Eigen::Index d = product_of(dims);
    std::vector<int> out(static_cast<std::size_t>(d), 0);
    for (Eigen::Index i = 0; i < d; ++i) {
        Eigen::Index rest = i;
        for (std::size_t m = dims.size(); m-- > 0;) {
            out[static_cast<std::size_t>(i)] += static_cast<int>(rest % dims[m]);
            rest /= dims[m];
        }
    }
    return out;
}

// Block Gauss-Seidel preconditioner over excitation sectors of vec(rho).
// Sector (n, m) holds rho(i, j) with n excitations in ket i and m in bra j;
// sectors are visited by ascending n + m, then n. Couplings to earlier
// sectors are substituted forward, couplings to later ones dropped. The
// number-conserving part of a Liouvillian acts on a sector as
//   Y -> A Y + Y B,
// which is solved with complex Schur forms; blocks without that structure
// fall back to a dense LU.
class SectorPreconditioner {
public:
    SectorPreconditioner() = default;

    void set_dims(std::vector<int> dims) { dims_ = std::move(dims); }

    template <class M>
    SectorPreconditioner& analyzePattern(const M&) { return *this; }
    template <class M>
    SectorPreconditioner& factorize(const M& m) { return compute(m); }

    template <class M>
    SectorPreconditioner& compute(const M& mat) {
        const Eigen::Index d = product_of(dims_);
        if (mat.rows() != d * d || mat.cols() != d * d) {
            throw DimensionMismatch("SectorPreconditioner: matrix side is not d^2");
        }
        d_ = d;
        build_sectors();
        const SparseMatrix a(mat);
        const Eigen::Index n = d * d;
        std::vector<Triplet> earlier;
        std::vector<std::vector<Triplet>> inside(blocks_.size());
        for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
            const std::size_t bc = block_of(c);
            for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
                const std::size_t br = block_of(it.row());
                if (br == bc) {
                    inside[br].emplace_back(local(it.row()), local(c), it.value());
                } else if (bc < br) {
                    earlier.emplace_back(it.row(), c, it.value());
                }
            }
        }
        lower_ = RowMajor(n, n);
        lower_.setFromTriplets(earlier.begin(), earlier.end());
        info_ = Eigen::Success;
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            if (!blocks_[b].factor(inside[b])) info_ = Eigen::NumericalIssue;
        }
        return *this;
    }

    DenseVector solve(const DenseVector& rhs) const {
        DenseVector y(rhs.size());
        for (const Block& blk : blocks_) {
            DenseMatrix r(blk.kets.size(), blk.bras.size());
            for (std::size_t q = 0; q < blk.bras.size(); ++q) {
                for (std::size_t p = 0; p < blk.kets.size(); ++p) {
                    const Eigen::Index row = blk.kets[p] + d_ * blk.bras[q];
                    Complex acc = rhs(row);
                    for (RowMajor::InnerIterator it(lower_, row); it; ++it) acc -= it.value() * y(it.col());
                    r(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = acc;
                }
            }
            const DenseMatrix s = blk.solve(r);
            for (std::size_t q = 0; q < blk.bras.size(); ++q) {
                for (std::size_t p = 0; p < blk.kets.size(); ++p) {
                    y(blk.kets[p] + d_ * blk.bras[q]) = s(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
                }
            }
        }
        return y;
    }

    Eigen::ComputationInfo info() const { return info_; }

private:
    using RowMajor = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

    struct Block {
        std::vector<Eigen::Index> kets, bras;
        bool kronecker{false};
        DenseMatrix qa, ta, qb, tb;                // A = qa ta qa^+, B = qb tb qb^+
        Eigen::PartialPivLU<DenseMatrix> dense;    // fallback on vec(Y)

        Eigen::Index rows() const { return static_cast<Eigen::Index>(kets.size()); }
        Eigen::Index cols() const { return static_cast<Eigen::Index>(bras.size()); }

        // Entries use local index p + rows() * q for Y(p, q).
        bool factor(const std::vector<Triplet>& entries) {
            const Eigen::Index np = rows(), nq = cols(), size = np * nq;
            DenseMatrix a = DenseMatrix::Zero(np, np), b = DenseMatrix::Zero(nq, nq);
            for (const Triplet& t : entries) {
                const Eigen::Index pr = t.row() % np, qr = t.row() / np;
                const Eigen::Index pc = t.col() % np, qc = t.col() / np;
                if (qr == 0 && qc == 0) a(pr, pc) = t.value();
                if (pr == 0 && pc == 0) b(qc, qr) = t.value();
            }
            b.diagonal().array() -= a(0, 0);
            kronecker = reproduces(entries, a, b);
            if (kronecker) {
                Eigen::ComplexSchur<DenseMatrix> sa(a), sb(b);
                qa = sa.matrixU();
                ta = sa.matrixT();
                qb = sb.matrixU();
                tb = sb.matrixT();
                const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
                double gap = std::numeric_limits<double>::infinity();
                for (Eigen::Index p = 0; p < np; ++p)
                    for (Eigen::Index q = 0; q < nq; ++q) gap = std::min(gap, std::abs(ta(p, p) + tb(q, q)));
                return gap > 1e-12 * scale;
            }
            DenseMatrix full = DenseMatrix::Zero(size, size);
            for (const Triplet& t : entries) full(t.row(), t.col()) += t.value();
            dense.compute(full);
            return dense.rcond() > 1e-12;
        }

        // Compares the block with Y -> A Y + Y B on a fixed probe matrix.
        bool reproduces(const std::vector<Triplet>& entries, const DenseMatrix& a, const DenseMatrix& b) const {
            const Eigen::Index np = rows(), nq = cols();
            DenseMatrix probe(np, nq);
            for (Eigen::Index q = 0; q < nq; ++q)
                for (Eigen::Index p = 0; p < np; ++p) probe(p, q) = Complex(std::sin(1.0 + p + 7.0 * q), std::cos(3.0 * p + q));
            DenseMatrix direct = DenseMatrix::Zero(np, nq);
            for (const Triplet& t : entries) {
                direct(t.row() % np, t.row() / np) += t.value() * probe(t.col() % np, t.col() / np);
            }
            const DenseMatrix kron = a * probe + probe * b;
            const double scale = std::max(1.0, kron.cwiseAbs().maxCoeff());
            return (direct - kron).cwiseAbs().maxCoeff() <= 1e-13 * scale;
        }

        DenseMatrix solve(const DenseMatrix& r) const {
            const Eigen::Index np = rows(), nq = cols();
            if (!kronecker) {
                const DenseVector x = dense.solve(Eigen::Map<const DenseVector>(r.data(), np * nq));
                return Eigen::Map<const DenseMatrix>(x.data(), np, nq);
            }
            // ta Z + Z tb = qa^+ r qb with both factors upper triangular
            const DenseMatrix c = qa.adjoint() * r * qb;
            DenseMatrix z(np, nq);
            for (Eigen::Index q = 0; q < nq; ++q) {
                DenseVector col = c.col(q);
                for (Eigen::Index k = 0; k < q; ++k) col -= tb(k, q) * z.col(k);
                DenseMatrix shifted = ta;
                shifted.diagonal().array() += tb(q, q);
                z.col(q) = shifted.triangularView<Eigen::Upper>().solve(col);
            }
            return qa * z * qb.adjoint();
        }
    };

    void build_sectors() {
        const std::vector<int> exc = excitation_numbers(dims_);
        const int top = *std::max_element(exc.begin(), exc.end());
        std::vector<std::vector<Eigen::Index>> by_count(static_cast<std::size_t>(top) + 1);
        for (Eigen::Index i = 0; i < d_; ++i) by_count[static_cast<std::size_t>(exc[static_cast<std::size_t>(i)])].push_back(i);
        blocks_.clear();
        sector_of_.assign(static_cast<std::size_t>(d_ * d_), 0);
        local_.assign(static_cast<std::size_t>(d_ * d_), 0);
        for (int total = 0; total <= 2 * top; ++total) {
            for (int n = std::max(0, total - top); n <= std::min(total, top); ++n) {
                Block blk;
                blk.kets = by_count[static_cast<std::size_t>(n)];
                blk.bras = by_count[static_cast<std::size_t>(total - n)];
                const std::size_t id = blocks_.size();
                for (std::size_t q = 0; q < blk.bras.size(); ++q) {
                    for (std::size_t p = 0; p < blk.kets.size(); ++p) {
                        const auto k = static_cast<std::size_t>(blk.kets[p] + d_ * blk.bras[q]);
                        sector_of_[k] = id;
                        local_[k] = static_cast<Eigen::Index>(p + blk.kets.size() * q);
                    }
                }
                blocks_.push_back(std::move(blk));
            }
        }
    }

    std::size_t block_of(Eigen::Index k) const { return sector_of_[static_cast<std::size_t>(k)]; }
    Eigen::Index local(Eigen::Index k) const { return local_[static_cast<std::size_t>(k)]; }

    std::vector<int> dims_;
    Eigen::Index d_{0};
    std::vector<Block> blocks_;
    std::vector<std::size_t> sector_of_;
    std::vector<Eigen::Index> local_;
    RowMajor lower_;
    Eigen::ComputationInfo info_{Eigen::Success};
};

} // namespace detail

struct SteadyStateOptions {
    // Optional per-basis-state magnitudes w_i. The unknowns are rescaled as
    // rho(i,k) = w_i w_k y(i,k) before factorization, which keeps weak-drive
    // coherences between high Fock states above round-off.
    std::vector<double> basis_weights;
    double residual_tol{1e-8};
    LinearSolver solver{LinearSolver::Iterative};
    double gmres_tol{1e-14};
    int gmres_max_iterations{2000};
    int gmres_restart{200};
};

struct SteadyStateResult {
    DensityMatrix rho;                 // Hermitized
    int n_levels_used{0};              // per mode
    int certified_n_max{0};            // smallest truncation certified by the ladder
    double truncation_drift{0.0};      // largest relative change of g2, g3, n_C across that pair
    double residual{0.0};              // max |L vec(rho_raw)|
    bool converged{false};
    double raw_hermiticity_defect{0.0};  // before Hermitization
    DensityDiagnostics diagnostics;
    double hamiltonian_nonhermiticity{0.0};
    std::map<std::string, double> observables;
    std::vector<std::string> warnings;
};

// Solves L vec(rho) = 0 with Tr rho = 1 by replacing the first row of L (the
// vacuum population equation) with the trace functional.
inline SteadyStateResult steady_state(const Superoperator& l, const SteadyStateOptions& opt = {}) {
    const Eigen::Index d = l.dim();
    const Eigen::Index n = d * d;
    if (l.data.rows() != n || l.data.cols() != n) {
        throw DimensionMismatch("steady_state: superoperator side is not d^2");
    }
    std::vector<double> w(static_cast<std::size_t>(d), 1.0);
    if (!opt.basis_weights.empty()) {
        if (static_cast<Eigen::Index>(opt.basis_weights.size()) != d) {
            throw DimensionMismatch("steady_state: basis_weights length differs from d");
        }
        w = opt.basis_weights;
    }
    auto col_scale = [&](Eigen::Index idx) {
        return w[static_cast<std::size_t>(idx % d)] * w[static_cast<std::size_t>(idx / d)];
    };

    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(l.data.nonZeros() + d));
    for (Eigen::Index k = 0; k < l.data.outerSize(); ++k) {
        const double ck = col_scale(k);
        for (SparseMatrix::InnerIterator it(l.data, k); it; ++it) {
            if (it.row() == 0) continue;
            entries.emplace_back(it.row(), k, it.value() * ck / col_scale(it.row()));
        }
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        entries.emplace_back(0, i * d + i, col_scale(i * d + i));
    }
    SparseMatrix a(n, n);
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();

    DenseVector rhs = DenseVector::Zero(n);
    rhs(0) = 1.0;
    DenseVector y;
    bool solved = false;   // by the iterative path
    if (opt.solver == LinearSolver::Iterative) {
        Eigen::GMRES<SparseMatrix, detail::SectorPreconditioner> gmres;
        gmres.preconditioner().set_dims(l.dims);
        gmres.set_restart(opt.gmres_restart);
        gmres.setTolerance(opt.gmres_tol);
        gmres.setMaxIterations(opt.gmres_max_iterations);
        gmres.compute(a);
        if (gmres.info() == Eigen::Success) {
            y = gmres.solve(rhs);
            solved = gmres.info() == Eigen::Success && y.allFinite();
        }
    }
    if (!solved) {
        Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(a);
        lu.factorize(a);
        if (lu.info() != Eigen::Success) {
            throw NonUniqueSteadyState("steady_state: trace-constrained Liouvillian is singular (" +
                                       lu.lastErrorMessage() + ")");
        }
        y = lu.solve(rhs);
        if (lu.info() != Eigen::Success || !y.allFinite()) {
            throw SolverFailure("steady_state: sparse LU solve failed", std::numeric_limits<double>::infinity());
        }
    }
    DenseVector x(n);
    for (Eigen::Index k = 0; k < n; ++k) x(k) = col_scale(k) * y(k);

    SteadyStateResult out;
    out.residual = (l.data * x).cwiseAbs().maxCoeff();
    const DenseMatrix raw = Eigen::Map<const DenseMatrix>(x.data(), d, d);
    out.raw_hermiticity_defect = (raw - raw.adjoint()).cwiseAbs().maxCoeff();
    out.rho = DensityMatrix(l.dims, 0.5 * (raw + raw.adjoint()));
    out.diagnostics = diagnose(out.rho);
    out.converged = out.residual <= opt.residual_tol && out.diagnostics.unit_trace();
    if (!out.converged && solved) {
        SteadyStateOptions direct = opt;
        direct.solver = LinearSolver::Direct;
        return steady_state(l, direct);
    }
    if (!out.converged) {
        throw SolverFailure("steady_state: residual " + std::to_string(out.residual) + " above tolerance",
                            out.residual);
    }
    if (!out.diagnostics.positive()) {
        out.warnings.push_back("steady state has negative eigenvalue " +
                               std::to_string(out.diagnostics.min_eigenvalue));
    }
    out.n_levels_used = l.dims.empty() ? 0 : l.dims.front();
    return out;
}

inline constexpr double kPopulationFloor = 1e-14;

namespace detail {

// Tr(rho a^+k a^k) for the given mode, read off the diagonal (the operator
// is diagonal in the Fock basis with entries n(n-1)...(n-k+1)).
inline double factorial_moment(const DensityMatrix& rho, Mode mode, int k) {
    if (rho.dims.size() != 2) {
        throw DimensionMismatch("factorial_moment: expected a two-mode density matrix");
    }
    const int dc = rho.dims[0];
    const int da = rho.dims[1];
    double sum = 0.0;
    for (int ic = 0; ic < dc; ++ic) {
        for (int ia = 0; ia < da; ++ia) {
            const int n = mode == Mode::Clockwise ? ic : ia;
            double ff = 1.0;
            for (int j = 0; j < k; ++j) ff *= static_cast<double>(n - j);
            if (ff == 0.0) continue;
            const Eigen::Index idx = static_cast<Eigen::Index>(ic) * da + ia;
            sum += ff * rho.data(idx, idx).real();
        }
    }
    return sum;
}

} // namespace detail

inline double mode_population(const DensityMatrix& rho, Mode mode) {
    return detail::factorial_moment(rho, mode, 1);
}

// Tr(rho a^+a^+aa) / Tr(rho a^+a)^2 for the selected mode.
inline double correlation_g2(const DensityMatrix& rho, Mode mode) {
    const double n = mode_population(rho, mode);
    if (!(n > kPopulationFloor)) {
        throw VanishingPopulation("correlation_g2: <a^+a> of mode " + to_string(mode) + " vanishes");
    }
    return detail::factorial_moment(rho, mode, 2) / (n * n);
}

inline double correlation_g3(const DensityMatrix& rho, Mode mode) {
    const double n = mode_population(rho, mode);
    if (!(n > kPopulationFloor)) {
        throw VanishingPopulation("correlation_g3: <a^+a> of mode " + to_string(mode) + " vanishes");
    }
    return detail::factorial_moment(rho, mode, 3) / (n * n * n);
}

struct TruncationOptions {
    int n_start{3};   // initial N_max per mode (n_levels = N_max + 1)
    int step{4};
    int n_cap{40};
    double tol{1e-3};
};

struct LindbladOptions {
    CommutatorForm form{CommutatorForm::Verbatim};
    bool rescale_weak_drive{true};
};

// Collapse channels aC and aA, both at rate gamma_opt.
inline std::vector<CollapseChannel> cavity_channels(const ModelParams& p, int n_levels) {
    const double gamma = total_loss(p);
    const TwoModeLadder ladder = two_mode_ladder(n_levels);
    return {{ladder.a_c, gamma}, {ladder.a_a, gamma}};
}

// s^(nC + nA) with s the larger linear mean-field amplitude, capped at 1.
inline std::vector<double> weak_drive_weights(const ModelParams& p, int n_levels) {
    double s = 1.0;
    if (p.drive > 0.0) {
        try {
            const MeanFieldState lin = linear_steady_state(p);
            s = std::max(std::abs(lin.alpha_c), std::abs(lin.alpha_a));
        } catch (const DegenerateDrive&) {
            s = 1.0;
        }
        s = std::clamp(s, 1e-8, 1.0);
    }
    std::vector<double> w(static_cast<std::size_t>(n_levels) * static_cast<std::size_t>(n_levels));
    for (int ic = 0; ic < n_levels; ++ic) {
        for (int ia = 0; ia < n_levels; ++ia) {
            w[static_cast<std::size_t>(ic * n_levels + ia)] = std::max(std::pow(s, ic + ia), 1e-140);
        }
    }
    return w;
}

inline void fill_observables(SteadyStateResult& r) {
    auto undefined = std::numeric_limits<double>::quiet_NaN();
    const double nc = mode_population(r.rho, Mode::Clockwise);
    const double na = mode_population(r.rho, Mode::AntiClockwise);
    r.observables["n_C"] = nc;
    r.observables["n_A"] = na;
    r.observables["g2"] = nc > kPopulationFloor ? correlation_g2(r.rho, Mode::Clockwise) : undefined;
    r.observables["g3"] = nc > kPopulationFloor ? correlation_g3(r.rho, Mode::Clockwise) : undefined;
    r.observables["g2_A"] = na > kPopulationFloor ? correlation_g2(r.rho, Mode::AntiClockwise) : undefined;
    r.observables["g3_A"] = na > kPopulationFloor ? correlation_g3(r.rho, Mode::AntiClockwise) : undefined;
    r.observables["min_eigenvalue"] = r.diagnostics.min_eigenvalue;
}

// Single steady-state solve at fixed truncation N_max (n_levels = N_max + 1).
inline SteadyStateResult solve_at_truncation(const ModelParams& p, int n_max, const LindbladOptions& opt = {}) {
    const int n_levels = n_max + 1;
    const FockOperator h = build_hamiltonian(p, n_levels);
    const Superoperator l = build_liouvillian(h, cavity_channels(p, n_levels), opt.form);
    SteadyStateOptions so;
    if (opt.rescale_weak_drive) so.basis_weights = weak_drive_weights(p, n_levels);
    SteadyStateResult r = steady_state(l, so);
    r.n_levels_used = n_levels;
    r.certified_n_max = n_max;
    r.hamiltonian_nonhermiticity = relative_nonhermiticity(h);
    if (opt.form == CommutatorForm::Verbatim && r.hamiltonian_nonhermiticity > 1e-10) {
        r.warnings.push_back("Hamiltonian is non-Hermitian (relative " +
                             std::to_string(r.hamiltonian_nonhermiticity) +
                             "); commutator uses it verbatim");
    }
    fill_observables(r);
    return r;
}

namespace detail {

inline double relative_change(double a, double b) {
    if (std::isnan(a) && std::isnan(b)) return 0.0;
    if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::infinity();
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

} // namespace detail

// Truncation ladder N, N+step, ... until g2, g3 and n_C each change by less
// than `tol` (relative). Returns the larger solve of the first agreeing
// pair; certified_n_max records the smaller one.
inline SteadyStateResult solve_observables(const ModelParams& p, const TruncationOptions& trunc = {},
                                           const LindbladOptions& opt = {}) {
    p.validate();
    if (trunc.n_start < 3) {
        throw InvalidParameter("solve_observables: n_start must be >= 3");
    }
    if (p.drive == 0.0) {
        return solve_at_truncation(p, trunc.n_start, opt);
    }
    SteadyStateResult prev = solve_at_truncation(p, trunc.n_start, opt);
    for (int n = trunc.n_start + trunc.step; n <= trunc.n_cap; n += trunc.step) {
        SteadyStateResult cur = solve_at_truncation(p, n, opt);
        double drift = 0.0;
        for (const char* name : {"g2", "g3", "n_C"}) {
            drift = std::max(drift, detail::relative_change(prev.observables[name], cur.observables[name]));
        }
        if (drift <= trunc.tol) {
            cur.certified_n_max = n - trunc.step;
            cur.truncation_drift = drift;
            return cur;
        }
        prev = std::move(cur);
    }
    throw TruncationCapExceeded("solve_observables: no convergence up to N_max = " + std::to_string(trunc.n_cap));
}

} // namespace wgm

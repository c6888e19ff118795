// fock.hpp: sparse operators on truncated single- and two-mode Fock spaces

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "wgm/errors.hpp"

namespace wgm {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;
using Triplet = Eigen::Triplet<Complex>;

inline constexpr Complex kI{0.0, 1.0};

// Mode 0 is clockwise, mode 1 anti-clockwise. Two-mode operators are always
// tensor(C-part, A-part), so the C index varies slowest.
enum class Mode { Clockwise = 0, AntiClockwise = 1 };

inline std::string to_string(Mode mode) {
    return mode == Mode::Clockwise ? "C" : "A";
}

inline Eigen::Index product_of(const std::vector<int>& dims) {
    return std::accumulate(dims.begin(), dims.end(), Eigen::Index{1},
                           [](Eigen::Index acc, int d) { return acc * d; });
}

// Sparse complex operator with its per-mode truncation recorded.
struct FockOperator {
    std::vector<int> dims;
    SparseMatrix data;

    FockOperator() = default;
    FockOperator(std::vector<int> dims_, SparseMatrix data_)
        : dims(std::move(dims_)), data(std::move(data_)) {
        const Eigen::Index side = product_of(dims);
        if (data.rows() != side || data.cols() != side) {
            throw DimensionMismatch("FockOperator: matrix side does not match product of dims");
        }
        data.makeCompressed();
    }

    Eigen::Index size() const { return data.rows(); }

    FockOperator adjoint() const {
        return {dims, SparseMatrix(data.adjoint())};
    }

    bool all_finite() const {
        for (Eigen::Index k = 0; k < data.outerSize(); ++k) {
            for (SparseMatrix::InnerIterator it(data, k); it; ++it) {
                if (!std::isfinite(it.value().real()) || !std::isfinite(it.value().imag())) {
                    return false;
                }
            }
        }
        return true;
    }

    DenseMatrix dense() const { return DenseMatrix(data); }
};

namespace detail {

inline void require_same_dims(const FockOperator& a, const FockOperator& b, const char* op) {
    if (a.dims != b.dims) {
        throw DimensionMismatch(std::string(op) + ": operand dims differ");
    }
}

} // namespace detail

inline FockOperator operator+(const FockOperator& a, const FockOperator& b) {
    detail::require_same_dims(a, b, "operator+");
    return {a.dims, SparseMatrix(a.data + b.data)};
}

inline FockOperator operator-(const FockOperator& a, const FockOperator& b) {
    detail::require_same_dims(a, b, "operator-");
    return {a.dims, SparseMatrix(a.data - b.data)};
}

inline FockOperator operator*(const FockOperator& a, const FockOperator& b) {
    detail::require_same_dims(a, b, "operator*");
    return {a.dims, SparseMatrix(a.data * b.data)};
}

inline FockOperator operator*(Complex s, const FockOperator& a) {
    return {a.dims, SparseMatrix(s * a.data)};
}

inline FockOperator operator*(double s, const FockOperator& a) {
    return Complex{s, 0.0} * a;
}

// a|n> = sqrt(n)|n-1>
inline FockOperator annihilation(int n_levels) {
    if (n_levels < 2) {
        throw InvalidParameter("annihilation: n_levels must be >= 2");
    }
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(n_levels - 1));
    for (int n = 1; n < n_levels; ++n) {
        entries.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
    }
    SparseMatrix m(n_levels, n_levels);
    m.setFromTriplets(entries.begin(), entries.end());
    return {{n_levels}, std::move(m)};
}

inline FockOperator creation(int n_levels) {
    return annihilation(n_levels).adjoint();
}

inline FockOperator identity(const std::vector<int>& dims) {
    const Eigen::Index side = product_of(dims);
    SparseMatrix m(side, side);
    m.setIdentity();
    return {dims, std::move(m)};
}

inline FockOperator identity(int n_levels) {
    return identity(std::vector<int>{n_levels});
}

inline FockOperator diagonal(const std::vector<double>& values) {
    const auto n = static_cast<Eigen::Index>(values.size());
    std::vector<Triplet> entries;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (values[static_cast<std::size_t>(i)] != 0.0) {
            entries.emplace_back(i, i, values[static_cast<std::size_t>(i)]);
        }
    }
    SparseMatrix m(n, n);
    m.setFromTriplets(entries.begin(), entries.end());
    return {{static_cast<int>(n)}, std::move(m)};
}

// Kronecker product of sparse matrices, A's index varying slowest.
inline SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
    for (Eigen::Index ka = 0; ka < a.outerSize(); ++ka) {
        for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia) {
            for (Eigen::Index kb = 0; kb < b.outerSize(); ++kb) {
                for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib) {
                    entries.emplace_back(ia.row() * b.rows() + ib.row(),
                                         ia.col() * b.cols() + ib.col(),
                                         ia.value() * ib.value());
                }
            }
        }
    }
    SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    out.setFromTriplets(entries.begin(), entries.end());
    return out;
}

inline FockOperator tensor(const FockOperator& a, const FockOperator& b) {
    std::vector<int> dims = a.dims;
    dims.insert(dims.end(), b.dims.begin(), b.dims.end());
    return {std::move(dims), kron(a.data, b.data)};
}

// Ladder operators of the two-mode space with n_levels per mode.
struct TwoModeLadder {
    FockOperator a_c;
    FockOperator a_a;

    const FockOperator& operator[](Mode mode) const {
        return mode == Mode::Clockwise ? a_c : a_a;
    }
};

inline TwoModeLadder two_mode_ladder(int n_levels) {
    const FockOperator a = annihilation(n_levels);
    const FockOperator id = identity(n_levels);
    return {tensor(a, id), tensor(id, a)};
}

// Annihilation operator of `mode` on a space with the given per-mode dims.
inline FockOperator mode_annihilation(const std::vector<int>& dims, std::size_t mode) {
    if (mode >= dims.size()) {
        throw DimensionMismatch("mode_annihilation: mode index out of range");
    }
    FockOperator out = (mode == 0) ? annihilation(dims[0]) : identity(dims[0]);
    for (std::size_t k = 1; k < dims.size(); ++k) {
        out = tensor(out, k == mode ? annihilation(dims[k]) : identity(dims[k]));
    }
    return out;
}

// Dense complex matrix; the Hermiticity/trace/positivity invariants are
// checked by diagnose() rather than enforced on construction, because
// steady states of non-Lindblad generators may violate positivity.
struct DensityMatrix {
    std::vector<int> dims;
    DenseMatrix data;

    DensityMatrix() = default;
    DensityMatrix(std::vector<int> dims_, DenseMatrix data_)
        : dims(std::move(dims_)), data(std::move(data_)) {
        const Eigen::Index side = product_of(dims);
        if (data.rows() != side || data.cols() != side) {
            throw DimensionMismatch("DensityMatrix: matrix side does not match product of dims");
        }
    }

    Eigen::Index size() const { return data.rows(); }
    Complex trace() const { return data.trace(); }

    static DensityMatrix pure(const std::vector<int>& dims, const DenseVector& ket) {
        return {dims, ket * ket.adjoint()};
    }

    static DensityMatrix basis_state(const std::vector<int>& dims, Eigen::Index index) {
        const Eigen::Index side = product_of(dims);
        if (index < 0 || index >= side) {
            throw DimensionMismatch("basis_state: index out of range");
        }
        DenseMatrix m = DenseMatrix::Zero(side, side);
        m(index, index) = 1.0;
        return {dims, std::move(m)};
    }
};

struct DensityDiagnostics {
    double hermiticity_defect{0.0};   // max |rho - rho^dagger|
    double trace_defect{0.0};         // |Tr rho - 1|
    double min_eigenvalue{0.0};       // of the Hermitian part

    static constexpr double kHermiticityTol = 1e-10;
    static constexpr double kTraceTol = 1e-10;
    static constexpr double kPositivityTol = -1e-8;

    bool hermitian() const { return hermiticity_defect <= kHermiticityTol; }
    bool unit_trace() const { return trace_defect <= kTraceTol; }
    bool positive() const { return min_eigenvalue >= kPositivityTol; }
    bool valid() const { return hermitian() && unit_trace() && positive(); }
};

inline DensityDiagnostics diagnose(const DensityMatrix& rho) {
    DensityDiagnostics d;
    d.hermiticity_defect = (rho.data - rho.data.adjoint()).cwiseAbs().maxCoeff();
    d.trace_defect = std::abs(rho.trace() - Complex{1.0, 0.0});
    const DenseMatrix herm = 0.5 * (rho.data + rho.data.adjoint());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = solver.eigenvalues().minCoeff();
    return d;
}

// Tr(rho * op)
inline Complex expect(const DensityMatrix& rho, const FockOperator& op) {
    if (rho.dims != op.dims) {
        throw DimensionMismatch("expect: density matrix and operator dims differ");
    }
    Complex sum{0.0, 0.0};
    for (Eigen::Index k = 0; k < op.data.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(op.data, k); it; ++it) {
            sum += rho.data(it.col(), it.row()) * it.value();
        }
    }
    return sum;
}

} // namespace wgm

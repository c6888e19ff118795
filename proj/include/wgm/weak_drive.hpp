// weak_drive.hpp: two-excitation amplitude ansatz for F << gamma_in and the
// resulting closed-form g2 estimates.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

#include "wgm/errors.hpp"
#include "wgm/fock.hpp"
#include "wgm/model.hpp"

namespace wgm {

// Amplitudes C_mn of |mn> (m photons clockwise, n anti-clockwise).
struct AmplitudeSet {
    Complex c00{1.0, 0.0};
    Complex c10, c01, c11, c20, c02;
};

// Coefficients of the amplitude equations, independent of how J1, J2 were
// obtained. delta_bar = delta - i gamma_opt / 2.
struct WeakDriveInputs {
    Complex delta_bar;
    Complex j1, j2;
    double kerr{0.0};
    Complex drive;

    static WeakDriveInputs from(const ModelParams& p) {
        const auto [a, b] = backscatter_coeffs(p);
        return {Complex{p.delta, -0.5 * total_loss(p)}, a, b, p.kerr, p.drive_amplitude()};
    }
};

struct WeakDriveOptions {
    // Keep the O(F C20), O(F C11) feedback into the one-excitation equations
    // and solve the coupled 5x5 system instead of the two triangular blocks.
    bool keep_feedback{false};
    double singular_tol{1e-14};
};

inline constexpr double kWeakDriveLimit = 0.1;

// Steady state of i dC/dt = H_eff C with C00 = 1, where H_eff is the driven
// Kerr Hamiltonian minus i gamma_opt/2 per photon:
//   0 = iF + Db C10 + J2 C01 [- i sqrt2 F C20]
//   0 = J1 C10 + Db C01 [- iF C11]
//   0 = iF C01 + 2Db C11 + sqrt2 J1 C20 + sqrt2 J2 C02
//   0 = i sqrt2 F C10 + sqrt2 J2 C11 + 2(Db + U) C20
//   0 = sqrt2 J1 C11 + 2(Db + U) C02
inline AmplitudeSet solve_amplitudes(const WeakDriveInputs& in, const WeakDriveOptions& opt = {}) {
    const double r2 = std::numbers::sqrt2;
    const Complex db = in.delta_bar;
    const Complex f = in.drive;
    const Complex du = db + in.kerr;
    AmplitudeSet out;

    if (!opt.keep_feedback) {
        Eigen::Matrix2cd one;
        one << db, in.j2,
               in.j1, db;
        const Eigen::Vector2cd rhs1(-kI * f, 0.0);
        Eigen::FullPivLU<Eigen::Matrix2cd> lu1(one);
        if (std::abs(one.determinant()) < opt.singular_tol) {
            throw SingularAmplitudeSystem("solve_amplitudes: one-excitation block is singular");
        }
        const Eigen::Vector2cd c1 = lu1.solve(rhs1);
        out.c10 = c1(0);
        out.c01 = c1(1);

        // unknowns (C11, C20, C02)
        Eigen::Matrix3cd two;
        two << 2.0 * db, r2 * in.j1, r2 * in.j2,
               r2 * in.j2, 2.0 * du, 0.0,
               r2 * in.j1, 0.0, 2.0 * du;
        const Eigen::Vector3cd rhs2(-kI * f * out.c01, -kI * r2 * f * out.c10, 0.0);
        if (std::abs(two.determinant()) < opt.singular_tol) {
            throw SingularAmplitudeSystem("solve_amplitudes: two-excitation block is singular");
        }
        const Eigen::Vector3cd c2 = Eigen::FullPivLU<Eigen::Matrix3cd>(two).solve(rhs2);
        out.c11 = c2(0);
        out.c20 = c2(1);
        out.c02 = c2(2);
        return out;
    }

    // unknowns (C10, C01, C11, C20, C02)
    Eigen::Matrix<Complex, 5, 5> full = Eigen::Matrix<Complex, 5, 5>::Zero();
    full(0, 0) = db;        full(0, 1) = in.j2;     full(0, 3) = -kI * r2 * f;
    full(1, 0) = in.j1;     full(1, 1) = db;        full(1, 2) = -kI * f;
    full(2, 1) = kI * f;    full(2, 2) = 2.0 * db;  full(2, 3) = r2 * in.j1;  full(2, 4) = r2 * in.j2;
    full(3, 0) = kI * r2 * f; full(3, 2) = r2 * in.j2; full(3, 3) = 2.0 * du;
    full(4, 2) = r2 * in.j1; full(4, 4) = 2.0 * du;
    Eigen::Matrix<Complex, 5, 1> rhs = Eigen::Matrix<Complex, 5, 1>::Zero();
    rhs(0) = -kI * f;
    if (std::abs(full.determinant()) < opt.singular_tol) {
        throw SingularAmplitudeSystem("solve_amplitudes: coupled amplitude system is singular");
    }
    const Eigen::Matrix<Complex, 5, 1> c = Eigen::FullPivLU<Eigen::Matrix<Complex, 5, 5>>(full).solve(rhs);
    out.c10 = c(0);
    out.c01 = c(1);
    out.c11 = c(2);
    out.c20 = c(3);
    out.c02 = c(4);
    return out;
}

inline AmplitudeSet solve_amplitudes(const ModelParams& p, const WeakDriveOptions& opt = {}) {
    if (!(p.drive < kWeakDriveLimit * p.gamma_in)) {
        throw InvalidParameter("solve_amplitudes: drive must satisfy F < 0.1 gamma_in");
    }
    return solve_amplitudes(WeakDriveInputs::from(p), opt);
}

// 2 |C20|^2 / |C10|^4
inline double g2_weak(const AmplitudeSet& c) {
    if (!(std::abs(c.c10) > 1e-14)) {
        throw VanishingPopulation("g2_weak: C10 vanishes");
    }
    return 2.0 * std::norm(c.c20) / (std::norm(c.c10) * std::norm(c.c10));
}

inline double g2_weak(const ModelParams& p, const WeakDriveOptions& opt = {}) {
    return g2_weak(solve_amplitudes(p, opt));
}

// |Db|^2 / |Db + U|^2, the J1 J2 -> 0 limit of g2_weak.
inline double g2_at_exceptional_point(const ModelParams& p) {
    const auto [j1, j2] = backscatter_coeffs(p);
    const double threshold = 1e-6 * std::abs(p.eps1);
    if (!(std::min(std::abs(j1), std::abs(j2)) <= threshold)) {
        throw NotAtExceptionalPoint("g2_at_exceptional_point: min(|J1|,|J2|) exceeds 1e-6 |eps1|");
    }
    const Complex db{p.delta, -0.5 * total_loss(p)};
    return std::norm(db) / std::norm(db + p.kerr);
}

// Mode populations of the ansatz state (C00 = 1 normalization).
inline double weak_population_c(const AmplitudeSet& c) {
    return std::norm(c.c10) + std::norm(c.c11) + 2.0 * std::norm(c.c20);
}

inline double weak_population_a(const AmplitudeSet& c) {
    return std::norm(c.c01) + std::norm(c.c11) + 2.0 * std::norm(c.c02);
}

} // namespace wgm

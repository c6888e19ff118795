// model.hpp: physical parameters, backscattering, effective 2x2 spectrum,
// exceptional-point angles and the driven Kerr Hamiltonian.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "wgm/errors.hpp"
#include "wgm/fock.hpp"

namespace wgm {

enum class LossConvention {
    IncludeExternal,  // gamma_opt = gamma_in + gamma_ex - Im(eps1 + eps2)
    PaperLiteral      // gamma_opt = gamma_in - Im(eps1 + eps2)
};

inline std::string to_string(LossConvention c) {
    return c == LossConvention::IncludeExternal ? "include_ex" : "paper_literal";
}

inline LossConvention loss_convention_from_string(const std::string& s) {
    if (s == "include_ex" || s == "IncludeExternal") return LossConvention::IncludeExternal;
    if (s == "paper_literal" || s == "PaperLiteral") return LossConvention::PaperLiteral;
    throw ConfigError("unknown loss convention '" + s + "' (expected include_ex|paper_literal)");
}

// All rates and frequencies in units of gamma_in. `delta` is the shifted
// detuning Delta_c + Re(eps1 + eps2) in the frame rotating with the pump.
struct ModelParams {
    Complex eps1{0.0, 0.0};
    Complex eps2{0.0, 0.0};
    int m{1};
    double beta{0.0};
    double kerr{0.0};
    double drive{0.0};
    double drive_phase{0.0};
    double delta{0.0};
    double gamma_in{1.0};
    double gamma_ex{1.0};
    LossConvention loss{LossConvention::IncludeExternal};

    void validate() const {
        if (!(gamma_in > 0.0)) throw InvalidParameter("gamma_in must be > 0");
        if (!(gamma_ex >= 0.0)) throw InvalidParameter("gamma_ex must be >= 0");
        if (!(kerr >= 0.0)) throw InvalidParameter("kerr must be >= 0");
        if (!(drive >= 0.0)) throw InvalidParameter("drive must be >= 0");
        if (m < 1) throw InvalidParameter("azimuthal mode number m must be >= 1");
        if (eps1.imag() > 0.0 || eps2.imag() > 0.0) {
            throw InvalidParameter("Im(eps_j) must be <= 0 (scatterers cannot add gain)");
        }
    }

    // Complex drive amplitude F e^{i phi}.
    Complex drive_amplitude() const { return std::polar(drive, drive_phase); }

    // Divide every rate and frequency by gamma_in so that gamma_in == 1.
    ModelParams normalized() const {
        ModelParams p = *this;
        const double g = gamma_in;
        p.eps1 /= g;
        p.eps2 /= g;
        p.kerr /= g;
        p.drive /= g;
        p.delta /= g;
        p.gamma_ex /= g;
        p.gamma_in = 1.0;
        return p;
    }

    // Cavity-pump detuning Delta_c = omega_c - omega_L.
    double cavity_detuning() const { return delta - (eps1 + eps2).real(); }
    void set_cavity_detuning(double delta_c) { delta = delta_c + (eps1 + eps2).real(); }

    // Scatterer values used throughout the resonator figures:
    // gamma_ex = gamma_in, eps1 = 1.5 - 0.1i, eps2 = 1.4999 - 0.101489i,
    // U = 0.059, F = 0.01, m = 4.
    static ModelParams reference() {
        ModelParams p;
        p.eps1 = {1.5, -0.1};
        p.eps2 = {1.4999, -0.101489};
        p.m = 4;
        p.kerr = 0.059;
        p.drive = 0.01;
        p.gamma_in = 1.0;
        p.gamma_ex = 1.0;
        return p;
    }
};

// J_{1,2} = eps1 + eps2 exp(-/+ i 2 m beta), first scatterer at angle 0.
inline std::pair<Complex, Complex> backscatter_coeffs(const ModelParams& p) {
    const double phase = 2.0 * p.m * p.beta;
    return {p.eps1 + p.eps2 * std::polar(1.0, -phase),
            p.eps1 + p.eps2 * std::polar(1.0, phase)};
}

inline double total_loss(const ModelParams& p) {
    const double scatter = -(p.eps1 + p.eps2).imag();
    return p.loss == LossConvention::IncludeExternal ? p.gamma_in + p.gamma_ex + scatter
                                                     : p.gamma_in + scatter;
}

// |sqrt(J1 J2)| below this (relative to |eps1| + |eps2|) counts as coalesced.
inline constexpr double kDegenerateSplitting = 1e-12;

struct EffectiveModeSpectrum {
    Complex omega;                  // common diagonal element
    std::array<Complex, 2> eigenvalues;   // {Omega_+, Omega_-}
    std::array<Eigen::Vector2cd, 2> eigenvectors;  // unnormalized right eigenvectors
    Complex splitting;              // Omega_+ - Omega_- = 2 sqrt(J1 J2)
    bool degenerate{false};         // eigenvectors coalesced; only eigenvectors[0] is meaningful
};

// [[Omega, J1], [J2, Omega]] in the rotating frame (omega_c folded into delta).
inline Eigen::Matrix2cd effective_matrix(const ModelParams& p) {
    const auto [j1, j2] = backscatter_coeffs(p);
    const Complex omega = Complex{0.0, -0.5 * (p.gamma_in + p.gamma_ex)} + p.eps1 + p.eps2;
    Eigen::Matrix2cd h;
    h << omega, j1,
         j2, omega;
    return h;
}

inline EffectiveModeSpectrum effective_spectrum(const ModelParams& p) {
    const auto [j1, j2] = backscatter_coeffs(p);
    EffectiveModeSpectrum s;
    s.omega = Complex{0.0, -0.5 * (p.gamma_in + p.gamma_ex)} + p.eps1 + p.eps2;
    const Complex root = std::sqrt(j1 * j2);   // principal branch
    s.eigenvalues = {s.omega + root, s.omega - root};
    s.splitting = 2.0 * root;
    const double scale = std::max(std::abs(p.eps1) + std::abs(p.eps2), 1.0);
    s.degenerate = std::abs(root) <= kDegenerateSplitting * scale;
    if (!s.degenerate) {
        // (sqrt J1, +-sqrt J2) with the sign fixed so that sqrt J1 * sqrt J2 = root
        const Complex r1 = std::sqrt(j1);
        Complex r2 = std::sqrt(j2);
        if (std::abs(r1 * r2 - root) > std::abs(r1 * r2 + root)) r2 = -r2;
        s.eigenvectors = {Eigen::Vector2cd(r1, r2), Eigen::Vector2cd(r1, -r2)};
    } else {
        // J2 -> 0 leaves (1,0) invariant, J1 -> 0 leaves (0,1) invariant.
        const Eigen::Vector2cd v = std::abs(j2) <= std::abs(j1) ? Eigen::Vector2cd(1.0, 0.0)
                                                                : Eigen::Vector2cd(0.0, 1.0);
        s.eigenvectors = {v, v};
    }
    return s;
}

enum class VanishingCoupling { J1, J2 };

struct ExceptionalAngle {
    int l{1};
    VanishingCoupling vanishing{VanishingCoupling::J1};
    double beta{0.0};
    double coupling_abs{0.0};   // |J1| or |J2| at beta, whichever should vanish
    double splitting_abs{0.0};  // |2 sqrt(J1 J2)| at beta
};

// beta_c = l pi / 2m -/+ (arg eps1 - arg eps2) / 2m. The minus branch zeroes
// J1, the plus branch J2. Requires |eps1| == |eps2| to relative 1e-3.
inline std::vector<ExceptionalAngle> exceptional_angles(const ModelParams& p,
                                                        const std::vector<int>& l_values) {
    const double a1 = std::abs(p.eps1);
    const double a2 = std::abs(p.eps2);
    const double scale = std::max(a1, a2);
    if (scale == 0.0 || std::abs(a1 - a2) > 1e-3 * scale) {
        throw AmplitudeMismatch("exceptional_angles: |eps1| and |eps2| differ beyond relative 1e-3");
    }
    const double arg_diff = std::arg(p.eps1) - std::arg(p.eps2);
    const double two_m = 2.0 * p.m;
    std::vector<ExceptionalAngle> out;
    for (int l : l_values) {
        if (l % 2 == 0) {
            throw InvalidParameter("exceptional_angles: l must be odd");
        }
        for (VanishingCoupling which : {VanishingCoupling::J1, VanishingCoupling::J2}) {
            const double sign = which == VanishingCoupling::J1 ? -1.0 : 1.0;
            ExceptionalAngle e;
            e.l = l;
            e.vanishing = which;
            e.beta = l * std::numbers::pi / two_m + sign * arg_diff / two_m;
            ModelParams at = p;
            at.beta = e.beta;
            const auto [j1, j2] = backscatter_coeffs(at);
            e.coupling_abs = std::abs(which == VanishingCoupling::J1 ? j1 : j2);
            e.splitting_abs = std::abs(2.0 * std::sqrt(j1 * j2));
            out.push_back(e);
        }
    }
    return out;
}

// Driven Kerr Hamiltonian on n_levels x n_levels Fock states:
//   D (nC + nA) + U (aC+ aC+ aC aC + aA+ aA+ aA aA) + J1 aC aA+ + J2 aC+ aA
//   + i (F aC+ - F* aC)
// Non-Hermitian whenever J1 != conj(J2).
inline FockOperator build_hamiltonian(const ModelParams& p, int n_levels) {
    if (n_levels < 2) {
        throw InvalidParameter("build_hamiltonian: n_levels must be >= 2");
    }
    const auto [j1, j2] = backscatter_coeffs(p);
    const Complex f = p.drive_amplitude();
    const TwoModeLadder ladder = two_mode_ladder(n_levels);
    const FockOperator& ac = ladder.a_c;
    const FockOperator& aa = ladder.a_a;
    const FockOperator acd = ac.adjoint();
    const FockOperator aad = aa.adjoint();

    FockOperator h = p.delta * (acd * ac + aad * aa);
    if (p.kerr != 0.0) {
        h = h + p.kerr * (acd * acd * ac * ac + aad * aad * aa * aa);
    }
    h = h + j1 * (ac * aad) + j2 * (acd * aa);
    h = h + (kI * f) * acd - (kI * std::conj(f)) * ac;
    h.data.prune(Complex{0.0, 0.0});
    return h;
}

// max |H - H^dagger| relative to max |H|.
inline double relative_nonhermiticity(const FockOperator& h) {
    if (h.data.nonZeros() == 0) return 0.0;
    SparseMatrix diff = h.data - SparseMatrix(h.data.adjoint());
    diff.makeCompressed();
    const double scale = h.data.coeffs().cwiseAbs().maxCoeff();
    if (diff.nonZeros() == 0 || scale == 0.0) return 0.0;
    return diff.coeffs().cwiseAbs().maxCoeff() / scale;
}

} // namespace wgm

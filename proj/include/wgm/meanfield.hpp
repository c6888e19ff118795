// meanfield.hpp: semiclassical steady states of the Langevin equations and
// the normalized forward transmission.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "wgm/errors.hpp"
#include "wgm/fock.hpp"
#include "wgm/model.hpp"

namespace wgm {

struct MeanFieldState {
    Complex alpha_c{0.0, 0.0};
    Complex alpha_a{0.0, 0.0};
    double residual{0.0};
    int branch_id{0};
    int iterations{0};
};

inline constexpr double kMeanFieldResidualTol = 1e-10;

// Right-hand sides of the noise-averaged Langevin equations,
//   d aC/dt = (-g/2 - iD - 2iU|aC|^2) aC - i J2 aA + F
//   d aA/dt = (-g/2 - iD - 2iU|aA|^2) aA - i J1 aC
struct LangevinRhs {
    Complex decay;   // -gamma_opt/2 - i delta
    double kerr;
    Complex j1, j2;
    Complex drive;

    explicit LangevinRhs(const ModelParams& p) {
        const auto [a, b] = backscatter_coeffs(p);
        j1 = a;
        j2 = b;
        decay = Complex{-0.5 * total_loss(p), -p.delta};
        kerr = p.kerr;
        drive = p.drive_amplitude();
    }

    Eigen::Vector2cd operator()(Complex ac, Complex aa) const {
        const Complex fc = (decay - 2.0 * kI * kerr * std::norm(ac)) * ac - kI * j2 * aa + drive;
        const Complex fa = (decay - 2.0 * kI * kerr * std::norm(aa)) * aa - kI * j1 * ac;
        return {fc, fa};
    }

    double residual(Complex ac, Complex aa) const {
        const Eigen::Vector2cd f = (*this)(ac, aa);
        return std::max(std::abs(f(0)), std::abs(f(1)));
    }
};

// Closed-form U = 0 amplitudes.
inline MeanFieldState linear_steady_state(const ModelParams& p) {
    const auto [j1, j2] = backscatter_coeffs(p);
    const Complex z{0.5 * total_loss(p), p.delta};
    const Complex den = z * z + j1 * j2;
    if (std::abs(den) < 1e-14) {
        throw DegenerateDrive("linear_steady_state: (gamma_opt/2 + i delta)^2 + J1 J2 vanishes");
    }
    const Complex f = p.drive_amplitude();
    MeanFieldState s;
    s.alpha_c = f * z / den;
    s.alpha_a = -kI * f * j1 / den;
    ModelParams linear = p;
    linear.kerr = 0.0;
    s.residual = LangevinRhs(linear).residual(s.alpha_c, s.alpha_a);
    return s;
}

struct NewtonOptions {
    int max_iterations{200};
    int max_halvings{20};
    double tolerance{kMeanFieldResidualTol};
    double distinct_distance{1e-6};
};

struct SeedFailure {
    std::size_t seed_index;
    double residual;
    std::string reason;
};

struct MeanFieldSolution {
    std::vector<MeanFieldState> roots;
    std::vector<SeedFailure> failures;

    bool multistable() const { return roots.size() > 1; }
};

namespace detail {

// Real 4x4 Jacobian of the steady-state map in x = (Re aC, Im aC, Re aA, Im aA).
// For f(alpha, conj alpha) with A = df/dalpha, B = df/dconj(alpha):
//   df/dRe = A + B,  df/dIm = i (A - B).
inline Eigen::Matrix4d langevin_jacobian(const LangevinRhs& rhs, Complex ac, Complex aa) {
    const Complex acc_a = rhs.decay - 4.0 * kI * rhs.kerr * std::norm(ac);
    const Complex acc_b = -2.0 * kI * rhs.kerr * ac * ac;
    const Complex aaa_a = rhs.decay - 4.0 * kI * rhs.kerr * std::norm(aa);
    const Complex aaa_b = -2.0 * kI * rhs.kerr * aa * aa;
    const Complex ca = -kI * rhs.j2;  // d fC / d aA
    const Complex ac_ = -kI * rhs.j1; // d fA / d aC

    const std::array<std::array<Complex, 4>, 2> cols = {{
        {acc_a + acc_b, kI * (acc_a - acc_b), ca, kI * ca},
        {ac_, kI * ac_, aaa_a + aaa_b, kI * (aaa_a - aaa_b)},
    }};
    Eigen::Matrix4d jac;
    for (int eq = 0; eq < 2; ++eq) {
        for (int var = 0; var < 4; ++var) {
            jac(2 * eq, var) = cols[static_cast<std::size_t>(eq)][static_cast<std::size_t>(var)].real();
            jac(2 * eq + 1, var) = cols[static_cast<std::size_t>(eq)][static_cast<std::size_t>(var)].imag();
        }
    }
    return jac;
}

} // namespace detail

// Damped Newton from one seed. Returns nullopt with `reason` filled on failure.
inline std::optional<MeanFieldState> newton_solve(const LangevinRhs& rhs, Complex ac, Complex aa,
                                                  const NewtonOptions& opt, std::string& reason,
                                                  double& last_residual) {
    double res = rhs.residual(ac, aa);
    for (int it = 0; it <= opt.max_iterations; ++it) {
        if (!std::isfinite(res)) {
            reason = "non-finite residual";
            last_residual = res;
            return std::nullopt;
        }
        if (res <= opt.tolerance) {
            MeanFieldState s;
            s.alpha_c = ac;
            s.alpha_a = aa;
            s.residual = res;
            s.iterations = it;
            last_residual = res;
            return s;
        }
        const Eigen::Vector2cd f = rhs(ac, aa);
        const Eigen::Vector4d fr(f(0).real(), f(0).imag(), f(1).real(), f(1).imag());
        const Eigen::Matrix4d jac = detail::langevin_jacobian(rhs, ac, aa);
        Eigen::FullPivLU<Eigen::Matrix4d> lu(jac);
        if (!lu.isInvertible()) {
            reason = "singular Jacobian";
            last_residual = res;
            return std::nullopt;
        }
        const Eigen::Vector4d step = lu.solve(-fr);
        double scale = 1.0;
        Complex trial_c, trial_a;
        double trial_res = res;
        for (int h = 0; h <= opt.max_halvings; ++h) {
            trial_c = ac + scale * Complex{step(0), step(1)};
            trial_a = aa + scale * Complex{step(2), step(3)};
            trial_res = rhs.residual(trial_c, trial_a);
            if (trial_res < res) break;
            scale *= 0.5;
        }
        if (!(trial_res < res)) {
            reason = "step halving exhausted";
            last_residual = res;
            return std::nullopt;
        }
        ac = trial_c;
        aa = trial_a;
        res = trial_res;
    }
    reason = "max iterations exceeded";
    last_residual = res;
    return std::nullopt;
}

// Solves the Kerr steady-state equations from the linear solution plus the
// given continuation seeds. Every distinct converged root is returned,
// ordered by ascending intracavity intensity |aC|^2 + |aA|^2.
inline MeanFieldSolution nonlinear_steady_state(const ModelParams& p,
                                                const std::vector<MeanFieldState>& continuation = {},
                                                const NewtonOptions& opt = {}) {
    const LangevinRhs rhs(p);
    std::vector<std::pair<Complex, Complex>> seeds;
    try {
        const MeanFieldState lin = linear_steady_state(p);
        seeds.emplace_back(lin.alpha_c, lin.alpha_a);
    } catch (const DegenerateDrive&) {
        seeds.emplace_back(Complex{0.0, 0.0}, Complex{0.0, 0.0});
    }
    for (const auto& s : continuation) seeds.emplace_back(s.alpha_c, s.alpha_a);

    MeanFieldSolution out;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        std::string reason;
        double last = 0.0;
        auto root = newton_solve(rhs, seeds[k].first, seeds[k].second, opt, reason, last);
        if (!root) {
            out.failures.push_back({k, last, reason});
            continue;
        }
        const bool duplicate = std::any_of(out.roots.begin(), out.roots.end(), [&](const MeanFieldState& r) {
            return std::max(std::abs(r.alpha_c - root->alpha_c), std::abs(r.alpha_a - root->alpha_a)) <=
                   opt.distinct_distance;
        });
        if (!duplicate) out.roots.push_back(*root);
    }
    std::sort(out.roots.begin(), out.roots.end(), [](const MeanFieldState& a, const MeanFieldState& b) {
        return std::norm(a.alpha_c) + std::norm(a.alpha_a) < std::norm(b.alpha_c) + std::norm(b.alpha_a);
    });
    for (std::size_t k = 0; k < out.roots.size(); ++k) out.roots[k].branch_id = static_cast<int>(k);
    return out;
}

// A mean-field solution at each point of a one-parameter path, with branch
// ids carried along by nearest-neighbour matching against the previous point.
struct ContinuationPoint {
    double value;
    MeanFieldSolution solution;
};

template <class Setter>
std::vector<ContinuationPoint> continue_steady_states(const ModelParams& base, const std::vector<double>& values,
                                                      Setter&& set, const NewtonOptions& opt = {}) {
    std::vector<ContinuationPoint> path;
    std::vector<MeanFieldState> previous;
    int next_branch = 0;
    for (double v : values) {
        ModelParams p = base;
        set(p, v);
        MeanFieldSolution sol = nonlinear_steady_state(p, previous, opt);
        // closest (previous, new) pairs are matched first
        std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < previous.size(); ++i) {
            for (std::size_t j = 0; j < sol.roots.size(); ++j) {
                const double d = std::abs(previous[i].alpha_c - sol.roots[j].alpha_c) +
                                 std::abs(previous[i].alpha_a - sol.roots[j].alpha_a);
                pairs.emplace_back(d, i, j);
            }
        }
        std::sort(pairs.begin(), pairs.end());
        std::vector<bool> prev_taken(previous.size(), false), root_taken(sol.roots.size(), false);
        for (const auto& [d, i, j] : pairs) {
            if (prev_taken[i] || root_taken[j]) continue;
            prev_taken[i] = root_taken[j] = true;
            sol.roots[j].branch_id = previous[i].branch_id;
        }
        for (std::size_t j = 0; j < sol.roots.size(); ++j) {
            if (!root_taken[j]) sol.roots[j].branch_id = next_branch++;
        }
        for (const auto& r : sol.roots) next_branch = std::max(next_branch, r.branch_id + 1);
        previous = sol.roots;
        path.push_back({v, std::move(sol)});
    }
    return path;
}

// T = |1 - (gamma_ex / F) aC|^2
inline double transmission(const ModelParams& p, const MeanFieldState& state) {
    const Complex f = p.drive_amplitude();
    if (std::abs(f) == 0.0) {
        throw InvalidParameter("transmission: drive F = 0 leaves the normalization undefined");
    }
    return std::norm(1.0 - p.gamma_ex / f * state.alpha_c);
}

} // namespace wgm

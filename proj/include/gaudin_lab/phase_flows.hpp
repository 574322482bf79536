#ifndef GAUDIN_LAB_PHASE_FLOWS_HPP
#define GAUDIN_LAB_PHASE_FLOWS_HPP

// Multi-time Hamiltonian dynamics on the product of coadjoint orbits (and the
// cotangent factor in genus 1). The flow of H_i moves group points by
// d(phi_a)/dt^i = -dH_dL[a] phi_a, so dL_a/dt^i = [-dH_dL[a], L_a], and moves
// (q, p) canonically.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gaudin_lab/errors.hpp"
#include "gaudin_lab/gaudin_models.hpp"
#include "gaudin_lab/lie_core.hpp"

namespace gaudin_lab
{

struct Tangent {
    std::vector<CMatrix> dL;
    CVector dq;
    CVector dp;
};

inline Tangent hamiltonian_vector_field(const GaudinModel &model, const PhaseState &state, std::size_t i)
{
    const auto d = lax_data(model, state);
    const auto g = grad_hamiltonian(model, d, i);
    Tangent t;
    for (std::size_t a = 0; a < d.residues.size(); ++a) {
        t.dL.push_back(commutator(-g.dH_dL[a], d.residues[a]));
    }
    if (model.genus() == 1) {
        t.dq = g.dH_dp;
        t.dp = -g.dH_dq;
    }
    return t;
}

// Generic bracket {F, G} = X_F G from gradients at the same state; the sign
// makes {H_i, f} the derivative of f along the flow of H_i.
inline cplx gradient_bracket(const std::vector<CMatrix> &residues, const HamiltonianGradient &f, const HamiltonianGradient &g)
{
    cplx s = 0.0;
    for (std::size_t a = 0; a < residues.size(); ++a) {
        s += (residues[a] * commutator(f.dH_dL[a], g.dH_dL[a])).trace();
    }
    if (f.dH_dq.size() > 0) {
        s += f.dH_dp.cwiseProduct(g.dH_dq).sum() - f.dH_dq.cwiseProduct(g.dH_dp).sum();
    }
    return s;
}

struct BracketValue {
    cplx value;
    // Sum of the magnitudes of the individual terms; the natural size of
    // the cancellation the bracket is expected to show.
    double scale;
};

inline BracketValue poisson_bracket_scaled(const GaudinModel &model, const PhaseState &state, std::size_t i, std::size_t j)
{
    const auto d = lax_data(model, state);
    const auto f = grad_hamiltonian(model, d, i);
    const auto g = grad_hamiltonian(model, d, j);
    BracketValue out{gradient_bracket(d.residues, f, g), 0.0};
    for (std::size_t a = 0; a < d.residues.size(); ++a) {
        out.scale += std::abs((d.residues[a] * f.dH_dL[a] * g.dH_dL[a]).trace());
        out.scale += std::abs((d.residues[a] * g.dH_dL[a] * f.dH_dL[a]).trace());
    }
    for (Eigen::Index mu = 0; mu < f.dH_dq.size(); ++mu) {
        out.scale += std::abs(f.dH_dp(mu) * g.dH_dq(mu)) + std::abs(f.dH_dq(mu) * g.dH_dp(mu));
    }
    return out;
}

inline cplx poisson_bracket(const GaudinModel &model, const PhaseState &state, std::size_t i, std::size_t j)
{
    return poisson_bracket_scaled(model, state, i, j).value;
}

enum class StepMethod { conjugation, rk4 };

inline std::string to_string(StepMethod m)
{
    return m == StepMethod::conjugation ? "conjugation" : "rk4";
}

inline StepMethod parse_step_method(const std::string &s)
{
    if (s == "conjugation") {
        return StepMethod::conjugation;
    }
    if (s == "rk4") {
        return StepMethod::rk4;
    }
    fail(ErrorKind::config, "unknown step method '" + s + "'");
}

namespace detail
{

struct Velocity {
    std::vector<CMatrix> gens; // d(phi_a)/dt = -gens[a] phi_a
    CVector dq;
    CVector dp;
};

inline Velocity velocity(const GaudinModel &model, const PhaseState &state, std::size_t i)
{
    const auto g = grad_hamiltonian(model, lax_data(model, state), i);
    Velocity v{g.dH_dL, {}, {}};
    if (model.genus() == 1) {
        v.dq = g.dH_dp;
        v.dp = -g.dH_dq;
    }
    return v;
}

inline PhaseState shifted(const PhaseState &s, const std::vector<CMatrix> &dphi, const CVector &dq, const CVector &dp, double dt)
{
    PhaseState out = s;
    for (std::size_t a = 0; a < s.phis.size(); ++a) {
        out.phis[a] = s.phis[a] + dt * dphi[a];
    }
    if (s.q.size() > 0) {
        out.q = s.q + dt * dq;
        out.p = s.p + dt * dp;
    }
    return out;
}

inline std::vector<CMatrix> group_rates(const Velocity &v, const PhaseState &s)
{
    std::vector<CMatrix> out;
    for (std::size_t a = 0; a < s.phis.size(); ++a) {
        out.push_back(-v.gens[a] * s.phis[a]);
    }
    return out;
}

} // namespace detail

// One step of signed length dt along the flow of H_i.
inline PhaseState advance(const GaudinModel &model, const PhaseState &state, std::size_t i, double dt, StepMethod method)
{
    if (!std::isfinite(dt)) {
        fail(ErrorKind::non_finite, "step length");
    }
    PhaseState out = state;
    if (method == StepMethod::conjugation) {
        // Exponential midpoint rule: phi stays on the group, L on its orbit.
        const auto v0 = detail::velocity(model, state, i);
        PhaseState mid = state;
        for (std::size_t a = 0; a < state.phis.size(); ++a) {
            mid.phis[a] = matrix_exponential(-0.5 * dt * v0.gens[a]) * state.phis[a];
        }
        if (model.genus() == 1) {
            mid.q = state.q + 0.5 * dt * v0.dq;
            mid.p = state.p + 0.5 * dt * v0.dp;
        }
        const auto v1 = detail::velocity(model, mid, i);
        for (std::size_t a = 0; a < state.phis.size(); ++a) {
            out.phis[a] = matrix_exponential(-dt * v1.gens[a]) * state.phis[a];
        }
        if (model.genus() == 1) {
            out.q = state.q + dt * v1.dq;
            out.p = state.p + dt * v1.dp;
        }
    } else {
        const auto v1 = detail::velocity(model, state, i);
        const auto r1 = detail::group_rates(v1, state);
        const PhaseState s2 = detail::shifted(state, r1, v1.dq, v1.dp, 0.5 * dt);
        const auto v2 = detail::velocity(model, s2, i);
        const auto r2 = detail::group_rates(v2, s2);
        const PhaseState s3 = detail::shifted(state, r2, v2.dq, v2.dp, 0.5 * dt);
        const auto v3 = detail::velocity(model, s3, i);
        const auto r3 = detail::group_rates(v3, s3);
        const PhaseState s4 = detail::shifted(state, r3, v3.dq, v3.dp, dt);
        const auto v4 = detail::velocity(model, s4, i);
        const auto r4 = detail::group_rates(v4, s4);
        for (std::size_t a = 0; a < state.phis.size(); ++a) {
            out.phis[a] = state.phis[a] + dt / 6.0 * (r1[a] + 2.0 * r2[a] + 2.0 * r3[a] + r4[a]);
        }
        if (model.genus() == 1) {
            out.q = state.q + dt / 6.0 * (v1.dq + 2.0 * v2.dq + 2.0 * v3.dq + v4.dq);
            out.p = state.p + dt / 6.0 * (v1.dp + 2.0 * v2.dp + 2.0 * v3.dp + v4.dp);
        }
    }
    if (out.t.size() > static_cast<Eigen::Index>(i)) {
        out.t(static_cast<Eigen::Index>(i)) += dt;
    }
    return out;
}

inline PhaseState step(const GaudinModel &model, const PhaseState &state, std::size_t i, double h, StepMethod method)
{
    if (!(h > 0.0)) {
        fail(ErrorKind::invalid_argument, "step size must be positive");
    }
    for (const auto &phi : state.phis) {
        if (!all_finite(phi)) {
            fail(ErrorKind::non_finite, "group point");
        }
    }
    if (!all_finite(state.q) || !all_finite(state.p)) {
        fail(ErrorKind::non_finite, "Cartan coordinates");
    }
    return advance(model, state, i, h, method);
}

// Axis-aligned polyline in multi-time.
struct FlowCurve {
    std::vector<RVector> waypoints;

    std::size_t dimension() const
    {
        return waypoints.empty() ? 0 : static_cast<std::size_t>(waypoints.front().size());
    }

    // Index of the coordinate that changes along segment k, or -1 for a
    // repeated waypoint.
    int active_axis(std::size_t k) const
    {
        const RVector d = waypoints.at(k + 1) - waypoints.at(k);
        int axis = -1;
        for (Eigen::Index c = 0; c < d.size(); ++c) {
            if (d(c) != 0.0) {
                if (axis >= 0) {
                    fail(ErrorKind::invalid_argument, "curve segment " + std::to_string(k) + " changes more than one time coordinate");
                }
                axis = static_cast<int>(c);
            }
        }
        return axis;
    }

    void validate(std::size_t n) const
    {
        if (waypoints.empty()) {
            fail(ErrorKind::invalid_argument, "curve needs at least one waypoint");
        }
        for (const auto &w : waypoints) {
            if (static_cast<std::size_t>(w.size()) != n) {
                fail(ErrorKind::dimension_mismatch, "waypoint dimension differs from the number of Hamiltonians");
            }
            if (!all_finite(w)) {
                fail(ErrorKind::non_finite, "waypoint");
            }
        }
        for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
            active_axis(k);
        }
    }
};

struct TrajectorySample {
    std::size_t segment = 0;
    PhaseState state;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    double h = 0.0;
    StepMethod method = StepMethod::rk4;
};

struct AbortInfo {
    std::string reason;
    std::size_t segment = 0;
    RVector last_good_t;
};

struct CheckedTrajectory {
    Trajectory trajectory;
    std::optional<AbortInfo> abort;
};

inline constexpr double default_pole_guard = 1e-4;

// Integrates along the curve, stopping with a diagnostic when the state
// becomes non-finite or a root value rho(Q) comes within pole_guard of the
// lattice.
inline CheckedTrajectory evolve_checked(const GaudinModel &model, const PhaseState &state, const FlowCurve &curve, double h, StepMethod method = StepMethod::rk4, double pole_guard = default_pole_guard)
{
    if (!(h > 0.0)) {
        fail(ErrorKind::invalid_argument, "step size must be positive");
    }
    curve.validate(model.num_hamiltonians());
    CheckedTrajectory out;
    out.trajectory.h = h;
    out.trajectory.method = method;
    PhaseState s = state;
    s.t = curve.waypoints.front();
    out.trajectory.samples.push_back({0, s});
    for (std::size_t k = 0; k + 1 < curve.waypoints.size(); ++k) {
        const int axis = curve.active_axis(k);
        if (axis < 0) {
            continue;
        }
        const double span = curve.waypoints[k + 1](axis) - curve.waypoints[k](axis);
        const auto steps = static_cast<long>(std::ceil(std::abs(span) / h - 1e-9));
        const double dt = span / static_cast<double>(steps);
        for (long n = 0; n < steps; ++n) {
            PhaseState next;
            std::string reason;
            try {
                next = advance(model, s, static_cast<std::size_t>(axis), dt, method);
                bool finite = all_finite(next.q) && all_finite(next.p);
                for (const auto &phi : next.phis) {
                    finite = finite && all_finite(phi);
                }
                if (!finite) {
                    reason = "non-finite state";
                } else if (model.genus() == 1 && resonance_distance(model, next.q) < pole_guard) {
                    reason = "pole collision: a root value rho(Q) reached the lattice";
                }
            } catch (const LabError &e) {
                reason = e.what();
            }
            if (!reason.empty()) {
                out.abort = AbortInfo{reason, k, s.t};
                return out;
            }
            next.t = curve.waypoints[k];
            next.t(axis) += dt * static_cast<double>(n + 1);
            s = std::move(next);
            out.trajectory.samples.push_back({k, s});
        }
    }
    return out;
}

inline Trajectory evolve(const GaudinModel &model, const PhaseState &state, const FlowCurve &curve, double h, StepMethod method = StepMethod::rk4)
{
    auto r = evolve_checked(model, state, curve, h, method);
    if (r.abort) {
        fail(ErrorKind::pole, "evolution aborted: " + r.abort->reason);
    }
    return std::move(r.trajectory);
}

// Trapezoidal pullback of sum_a Tr(Lambda_a phi_a^{-1} dphi_a) + p dq - H_i dt^i.
inline cplx action_along_curve(const GaudinModel &model, const Trajectory &traj)
{
    if (traj.samples.empty()) {
        fail(ErrorKind::invalid_argument, "action of an empty trajectory");
    }
    cplx total = 0.0;
    for (std::size_t k = 0; k + 1 < traj.samples.size(); ++k) {
        const PhaseState &a = traj.samples[k].state;
        const PhaseState &b = traj.samples[k + 1].state;
        cplx kinetic = 0.0;
        for (std::size_t al = 0; al < a.phis.size(); ++al) {
            const CMatrix dphi = b.phis[al] - a.phis[al];
            const CMatrix &lam = model.orbit_seeds()[al];
            kinetic += 0.5 * (lam * a.phis[al].partialPivLu().solve(dphi)).trace();
            kinetic += 0.5 * (lam * b.phis[al].partialPivLu().solve(dphi)).trace();
        }
        if (model.genus() == 1) {
            kinetic += 0.5 * (a.p + b.p).cwiseProduct(b.q - a.q).sum();
        }
        const RVector dt = b.t - a.t;
        cplx potential = 0.0;
        for (Eigen::Index i = 0; i < dt.size(); ++i) {
            if (dt(i) != 0.0) {
                const auto ii = static_cast<std::size_t>(i);
                potential += 0.5 * (hamiltonian(model, a, ii) + hamiltonian(model, b, ii)) * dt(i);
            }
        }
        total += kinetic - potential;
    }
    return total;
}

// Residual of the zero-curvature equation on one plaquette of side h:
// transport by exp(h M_i) then exp(h M_j) against the opposite order,
// with each M evaluated at the state its flow starts from. On the torus the
// flows commute only up to a diagonal gauge rotation, so the diagonal of the
// holonomy mismatch is dropped there.
inline double plaquette_residual(const GaudinModel &model, const PhaseState &s0, std::size_t i, std::size_t j, cplx z, double h)
{
    const PhaseState si = advance(model, s0, i, h, StepMethod::rk4);
    const PhaseState sj = advance(model, s0, j, h, StepMethod::rk4);
    const CMatrix ua = matrix_exponential(h * m_matrix(model, si, j, z).matrix()) * matrix_exponential(h * m_matrix(model, s0, i, z).matrix());
    const CMatrix ub = matrix_exponential(h * m_matrix(model, sj, i, z).matrix()) * matrix_exponential(h * m_matrix(model, s0, j, z).matrix());
    if (model.genus() == 0) {
        return (ua - ub).norm() / (h * h);
    }
    CMatrix gap = ua * ub.inverse();
    gap.diagonal().setZero();
    return gap.norm() / (h * h);
}

// Distance between two states up to the residual gauge freedom of the torus:
// constant diagonal conjugations and permutations of the matrix indices. The
// invariants compared are the diagonal entries of Q, of the momentum and of
// every residue, and the products L_a(r, c) L_b(c, r). On the sphere the
// residues are compared directly.
inline double invariant_state_gap(const GaudinModel &model, const PhaseState &x, const PhaseState &y)
{
    const auto lx = orbit_elements(model, x);
    const auto ly = orbit_elements(model, y);
    if (model.genus() == 0) {
        double gap = 0.0;
        for (std::size_t a = 0; a < lx.size(); ++a) {
            gap += (lx[a] - ly[a]).norm();
        }
        return gap;
    }
    const int m = model.m();
    const auto &basis = model.basis();
    const CVector qx = basis.cartan_element(x.q).diagonal(), qy = basis.cartan_element(y.q).diagonal();
    const CVector px = basis.cartan_element(basis.raise(x.p)).diagonal(), py = basis.cartan_element(basis.raise(y.p)).diagonal();
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        auto s = [&](int r) { return perm[static_cast<std::size_t>(r)]; };
        double gap = 0.0;
        for (int r = 0; r < m; ++r) {
            gap += std::abs(qx(r) - qy(s(r))) + std::abs(px(r) - py(s(r)));
        }
        for (std::size_t a = 0; a < lx.size(); ++a) {
            for (int r = 0; r < m; ++r) {
                gap += std::abs(lx[a](r, r) - ly[a](s(r), s(r)));
            }
            for (std::size_t b = 0; b < lx.size(); ++b) {
                for (int r = 0; r < m; ++r) {
                    for (int c = 0; c < m; ++c) {
                        if (r != c) {
                            gap += std::abs(lx[a](r, c) * lx[b](c, r) - ly[a](s(r), s(c)) * ly[b](s(c), s(r)));
                        }
                    }
                }
            }
        }
        best = std::min(best, gap);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

struct DiagnosticsReport {
    std::vector<double> hamiltonian_drift;
    std::vector<double> casimir_drift;
    double residue_sum_drift = 0.0;
    double isospectral_drift = 0.0;
    std::vector<std::vector<double>> closure_values;
    double zero_curvature_residual = 0.0;
    std::string residue_sum_mode = "monitor";
};

// Sum of residues (genus 0) or of their Cartan parts (genus 1).
inline CMatrix residue_sum(const GaudinModel &model, const std::vector<CMatrix> &residues)
{
    CMatrix s = CMatrix::Zero(model.m(), model.m());
    for (const auto &r : residues) {
        s += r;
    }
    if (model.genus() == 1) {
        s = CMatrix(s.diagonal().asDiagonal());
    }
    return s;
}

// Characteristic-polynomial coefficients of L(z_s) for every sample point.
inline std::vector<CVector> spectral_coefficients(const GaudinModel &model, const PhaseState &state, const std::vector<cplx> &z_samples)
{
    const auto d = lax_data(model, state);
    std::vector<CVector> out;
    for (cplx z : z_samples) {
        out.push_back(characteristic_coefficients(lax_matrix(model, d, z)));
    }
    return out;
}

inline DiagnosticsReport diagnostics(const GaudinModel &model, const Trajectory &traj, const std::vector<cplx> &z_samples)
{
    if (traj.samples.empty()) {
        fail(ErrorKind::invalid_argument, "diagnostics of an empty trajectory");
    }
    const std::size_t n = model.num_hamiltonians();
    const std::size_t n_pts = model.num_points();
    DiagnosticsReport rep;
    rep.hamiltonian_drift.assign(n, 0.0);
    rep.casimir_drift.assign(n_pts, 0.0);

    const PhaseState &first = traj.samples.front().state;
    std::vector<cplx> h0(n);
    for (std::size_t i = 0; i < n; ++i) {
        h0[i] = hamiltonian(model, first, i);
    }
    std::vector<CVector> cas0;
    for (const auto &seed : model.orbit_seeds()) {
        cas0.push_back(characteristic_coefficients(-seed));
    }
    const CMatrix sum0 = residue_sum(model, orbit_elements(model, first));
    const auto spec0 = spectral_coefficients(model, first, z_samples);

    for (const auto &sample : traj.samples) {
        const auto res = orbit_elements(model, sample.state);
        for (std::size_t i = 0; i < n; ++i) {
            rep.hamiltonian_drift[i] = std::max(rep.hamiltonian_drift[i], std::abs(hamiltonian(model, sample.state, i) - h0[i]));
        }
        for (std::size_t a = 0; a < n_pts; ++a) {
            const CVector c = characteristic_coefficients(res[a]);
            rep.casimir_drift[a] = std::max(rep.casimir_drift[a], (c - cas0[a]).cwiseAbs().maxCoeff());
        }
        rep.residue_sum_drift = std::max(rep.residue_sum_drift, (residue_sum(model, res) - sum0).norm());
        const auto spec = spectral_coefficients(model, sample.state, z_samples);
        for (std::size_t k = 0; k < spec.size(); ++k) {
            rep.isospectral_drift = std::max(rep.isospectral_drift, (spec[k] - spec0[k]).cwiseAbs().maxCoeff());
        }
    }

    rep.closure_values.assign(n, std::vector<double>(n, 0.0));
    for (const auto *s : {&first, &traj.samples.back().state}) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double v = std::abs(poisson_bracket(model, *s, i, j));
                rep.closure_values[i][j] = std::max(rep.closure_values[i][j], v);
                rep.closure_values[j][i] = rep.closure_values[i][j];
            }
        }
    }

    if (!z_samples.empty() && n >= 2) {
        const double h = traj.h;
        std::size_t last_segment = static_cast<std::size_t>(-1);
        for (const auto &sample : traj.samples) {
            if (sample.segment == last_segment) {
                continue;
            }
            last_segment = sample.segment;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    rep.zero_curvature_residual = std::max(rep.zero_curvature_residual, plaquette_residual(model, sample.state, i, j, z_samples.front(), h));
                }
            }
        }
    }
    return rep;
}

} // namespace gaudin_lab

#endif

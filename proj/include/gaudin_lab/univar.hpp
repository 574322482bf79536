#ifndef GAUDIN_LAB_UNIVAR_HPP
#define GAUDIN_LAB_UNIVAR_HPP

// Multi-time Hamiltonian flows on T*R^m with a linear group action on q:
// moment maps, gauged flow equations, closure of the Hamiltonians and
// curvature of a gauge field. Independent of the Gaudin machinery.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gaudin_lab/errors.hpp"
#include "gaudin_lab/lie_core.hpp"

namespace gaudin_lab::univar
{

struct ToyHamiltonian {
    std::string name;
    std::function<double(const RVector &p, const RVector &q)> value;
    std::function<RVector(const RVector &p, const RVector &q)> grad_p;
    std::function<RVector(const RVector &p, const RVector &q)> grad_q;
};

// f_ab^c stored densely, [X_a, X_b] = f_ab^c X_c.
class StructureConstants
{
public:
    StructureConstants() = default;
    explicit StructureConstants(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim * dim * dim), 0.0) {}

    int dim() const { return dim_; }
    double &operator()(int a, int b, int c) { return data_[index(a, b, c)]; }
    double operator()(int a, int b, int c) const { return data_[index(a, b, c)]; }

private:
    std::size_t index(int a, int b, int c) const { return static_cast<std::size_t>((a * dim_ + b) * dim_ + c); }

    int dim_ = 0;
    std::vector<double> data_;
};

struct ToySystem {
    int m = 0;
    std::vector<ToyHamiltonian> hamiltonians;
    std::vector<RMatrix> action_gens;
    StructureConstants structure_consts;

    int num_times() const { return static_cast<int>(hamiltonians.size()); }
    int algebra_dim() const { return static_cast<int>(action_gens.size()); }

    void validate() const
    {
        if (m < 1) {
            fail(ErrorKind::invalid_dimension, "phase dimension must be positive");
        }
        for (const auto &x : action_gens) {
            if (x.rows() != m || x.cols() != m) {
                fail(ErrorKind::dimension_mismatch, "generator size differs from phase dimension");
            }
        }
        if (structure_consts.dim() != algebra_dim()) {
            fail(ErrorKind::dimension_mismatch, "structure constants do not match the generators");
        }
    }
};

// Ã_i^a as callables of the multi-time t; outer index i, inner index a.
struct GaugeField {
    std::vector<std::vector<std::function<double(const RVector &t)>>> components;

    int num_times() const { return static_cast<int>(components.size()); }

    // Matrix of values A(i, a) at t.
    RMatrix at(const RVector &t) const
    {
        const int n = num_times();
        const int d = n > 0 ? static_cast<int>(components[0].size()) : 0;
        RMatrix out(n, d);
        for (int i = 0; i < n; ++i) {
            for (int a = 0; a < d; ++a) {
                out(i, a) = components[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)](t);
            }
        }
        return out;
    }

    static GaugeField zero(int n, int dim)
    {
        GaugeField g;
        g.components.assign(static_cast<std::size_t>(n), std::vector<std::function<double(const RVector &)>>(static_cast<std::size_t>(dim), [](const RVector &) { return 0.0; }));
        return g;
    }

    static GaugeField constant(const RMatrix &values)
    {
        GaugeField g;
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            std::vector<std::function<double(const RVector &)>> row;
            for (Eigen::Index a = 0; a < values.cols(); ++a) {
                const double v = values(i, a);
                row.emplace_back([v](const RVector &) { return v; });
            }
            g.components.push_back(std::move(row));
        }
        return g;
    }
};

struct CanonicalState {
    RVector p;
    RVector q;
};

inline void check_phase_point(const ToySystem &sys, const RVector &p, const RVector &q)
{
    if (p.size() != sys.m || q.size() != sys.m) {
        fail(ErrorKind::dimension_mismatch, "phase point has wrong dimension");
    }
}

// mu_a = -p^T X_a q.
inline RVector noether_moment(const ToySystem &sys, const RVector &p, const RVector &q)
{
    check_phase_point(sys, p, q);
    RVector mu(sys.algebra_dim());
    for (int a = 0; a < sys.algebra_dim(); ++a) {
        mu(a) = -p.dot(sys.action_gens[static_cast<std::size_t>(a)] * q);
    }
    return mu;
}

struct FlowDirection {
    RVector dq;
    RVector dp;
};

// Gauged flow directions for every time t^i at the multi-time t.
inline std::vector<FlowDirection> gauged_rhs(const ToySystem &sys, const RVector &p, const RVector &q, const RVector &t, const GaugeField &gauge)
{
    check_phase_point(sys, p, q);
    if (gauge.num_times() != sys.num_times()) {
        fail(ErrorKind::dimension_mismatch, "gauge field has wrong number of times");
    }
    const RMatrix a = gauge.at(t);
    if (sys.num_times() > 0 && a.cols() != sys.algebra_dim()) {
        fail(ErrorKind::dimension_mismatch, "gauge field has wrong algebra dimension");
    }
    std::vector<FlowDirection> out;
    for (int i = 0; i < sys.num_times(); ++i) {
        const auto &h = sys.hamiltonians[static_cast<std::size_t>(i)];
        FlowDirection d{h.grad_p(p, q), -h.grad_q(p, q)};
        for (int b = 0; b < sys.algebra_dim(); ++b) {
            const RMatrix &x = sys.action_gens[static_cast<std::size_t>(b)];
            d.dq += a(i, b) * (x * q);
            d.dp -= a(i, b) * (x.transpose() * p);
        }
        out.push_back(std::move(d));
    }
    return out;
}

// Classical rk4 along the time t^i, starting at multi-time t.
inline CanonicalState gauged_step(const ToySystem &sys, const GaugeField &gauge, const CanonicalState &s, const RVector &t, int i, double h)
{
    const auto idx = static_cast<std::size_t>(i);
    auto rhs = [&](const CanonicalState &x, double dt) {
        RVector tt = t;
        tt(i) += dt;
        return gauged_rhs(sys, x.p, x.q, tt, gauge)[idx];
    };
    auto shift = [](const CanonicalState &x, const FlowDirection &d, double c) { return CanonicalState{x.p + c * d.dp, x.q + c * d.dq}; };
    const auto k1 = rhs(s, 0.0);
    const auto k2 = rhs(shift(s, k1, 0.5 * h), 0.5 * h);
    const auto k3 = rhs(shift(s, k2, 0.5 * h), 0.5 * h);
    const auto k4 = rhs(shift(s, k3, h), h);
    return {s.p + h / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp), s.q + h / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq)};
}

// States along t^i from t0 to t0 + duration e_i in steps of h; the final step is shortened.
inline std::vector<CanonicalState> gauged_flow(const ToySystem &sys, const GaugeField &gauge, const CanonicalState &s0, const RVector &t0, int i, double duration, double h)
{
    if (!(h > 0.0) || !(duration >= 0.0)) {
        fail(ErrorKind::invalid_argument, "flow needs h > 0 and duration >= 0");
    }
    std::vector<CanonicalState> out{s0};
    RVector t = t0;
    double done = 0.0;
    while (done < duration) {
        const double dt = std::min(h, duration - done);
        out.push_back(gauged_step(sys, gauge, out.back(), t, i, dt));
        done += dt;
        t(i) = t0(i) + done;
    }
    return out;
}

// F^a_ij = d_i A^a_j - d_j A^a_i + f_bc^a A^b_i A^c_j with central differences.
inline std::vector<RMatrix> check_flatness(const GaugeField &gauge, const RVector &t, const StructureConstants &f, double step = 1e-5)
{
    const int n = gauge.num_times();
    const int d = f.dim();
    if (t.size() != n) {
        fail(ErrorKind::dimension_mismatch, "multi-time has wrong dimension");
    }
    const RMatrix a0 = gauge.at(t);
    std::vector<RMatrix> deriv; // deriv[k](i, a) = d_k A^a_i
    for (int k = 0; k < n; ++k) {
        RVector tp = t, tm = t;
        tp(k) += step;
        tm(k) -= step;
        deriv.push_back((gauge.at(tp) - gauge.at(tm)) / (2.0 * step));
    }
    std::vector<RMatrix> out(static_cast<std::size_t>(d), RMatrix::Zero(n, n));
    for (int a = 0; a < d; ++a) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                double v = deriv[static_cast<std::size_t>(i)](j, a) - deriv[static_cast<std::size_t>(j)](i, a);
                for (int b = 0; b < d; ++b) {
                    for (int c = 0; c < d; ++c) {
                        v += f(b, c, a) * a0(i, b) * a0(j, c);
                    }
                }
                out[static_cast<std::size_t>(a)](i, j) = v;
            }
        }
    }
    return out;
}

inline double max_abs(const std::vector<RMatrix> &f)
{
    double v = 0.0;
    for (const auto &x : f) {
        if (x.size() > 0) {
            v = std::max(v, x.cwiseAbs().maxCoeff());
        }
    }
    return v;
}

// Canonical bracket {F, G} = F_p . G_q - F_q . G_p, the derivative of G along the flow of F.
inline double canonical_bracket(const RVector &fp, const RVector &fq, const RVector &gp, const RVector &gq)
{
    return fp.dot(gq) - fq.dot(gp);
}

inline RMatrix bracket_matrix(const ToySystem &sys, const RVector &p, const RVector &q)
{
    check_phase_point(sys, p, q);
    const int n = sys.num_times();
    std::vector<RVector> gp, gq;
    for (const auto &h : sys.hamiltonians) {
        gp.push_back(h.grad_p(p, q));
        gq.push_back(h.grad_q(p, q));
    }
    RMatrix b = RMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
            b(i, j) = canonical_bracket(gp[ui], gq[ui], gp[uj], gq[uj]);
            b(j, i) = -b(i, j);
        }
    }
    return b;
}

inline RMatrix check_closure(const ToySystem &sys, const RVector &p, const RVector &q)
{
    return bracket_matrix(sys, p, q).cwiseAbs();
}

// max_ab |[X_a, X_b] - f_ab^c X_c|.
inline double generator_closure_residual(const ToySystem &sys)
{
    const int d = sys.algebra_dim();
    double worst = 0.0;
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            const RMatrix &xa = sys.action_gens[static_cast<std::size_t>(a)];
            const RMatrix &xb = sys.action_gens[static_cast<std::size_t>(b)];
            RMatrix r = xa * xb - xb * xa;
            for (int c = 0; c < d; ++c) {
                r -= sys.structure_consts(a, b, c) * sys.action_gens[static_cast<std::size_t>(c)];
            }
            worst = std::max(worst, r.cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

// Derivative of H_i along the lifted generator (q, p) -> (X_a q, -X_a^T p), by central differences.
inline double invariance_residual(const ToySystem &sys, const RVector &p, const RVector &q, double step = 1e-6)
{
    check_phase_point(sys, p, q);
    double worst = 0.0;
    for (const auto &h : sys.hamiltonians) {
        for (const auto &x : sys.action_gens) {
            const RVector dq = x * q;
            const RVector dp = -x.transpose() * p;
            const double d = (h.value(p + step * dp, q + step * dq) - h.value(p - step * dp, q - step * dq)) / (2.0 * step);
            worst = std::max(worst, std::abs(d));
        }
    }
    return worst;
}

// Rotations of the plane: H_1 = |p|^2/2 + V(|q|^2), H_2 = p_1 q_2 - p_2 q_1.
inline ToySystem planar_rotor()
{
    ToySystem s;
    s.m = 2;
    RMatrix x(2, 2);
    x << 0.0, -1.0, 1.0, 0.0;
    s.action_gens = {x};
    s.structure_consts = StructureConstants(1);
    ToyHamiltonian h1{"central", [](const RVector &p, const RVector &q) {
                          const double r = q.squaredNorm();
                          return 0.5 * p.squaredNorm() + 0.25 * r * r - 0.5 * r;
                      },
                      [](const RVector &p, const RVector &) -> RVector { return p; },
                      [](const RVector &, const RVector &q) -> RVector { return (q.squaredNorm() - 1.0) * q; }};
    ToyHamiltonian h2{"angular", [](const RVector &p, const RVector &q) { return p(0) * q(1) - p(1) * q(0); },
                      [](const RVector &, const RVector &q) -> RVector { return RVector{{q(1), -q(0)}}; },
                      [](const RVector &p, const RVector &) -> RVector { return RVector{{-p(1), p(0)}}; }};
    s.hamiltonians = {h1, h2};
    return s;
}

// so(3) acting on R^3: H_1 = |p|^2/2 + V(|q|^2), H_2 = |q x p|^2 / 2.
inline ToySystem spatial_rotor()
{
    ToySystem s;
    s.m = 3;
    for (int a = 0; a < 3; ++a) {
        RMatrix x = RMatrix::Zero(3, 3);
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        x(c, b) = 1.0;
        x(b, c) = -1.0;
        s.action_gens.push_back(x);
    }
    s.structure_consts = StructureConstants(3);
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        s.structure_consts(a, b, c) = 1.0;
        s.structure_consts(b, a, c) = -1.0;
    }
    ToyHamiltonian h1{"central", [](const RVector &p, const RVector &q) { return 0.5 * p.squaredNorm() + 0.5 * q.squaredNorm() + 0.1 * std::pow(q.squaredNorm(), 2); },
                      [](const RVector &p, const RVector &) -> RVector { return p; },
                      [](const RVector &, const RVector &q) -> RVector { return (1.0 + 0.4 * q.squaredNorm()) * q; }};
    ToyHamiltonian h2{"angular_sq", [](const RVector &p, const RVector &q) { return 0.5 * (q.squaredNorm() * p.squaredNorm() - std::pow(q.dot(p), 2)); },
                      [](const RVector &p, const RVector &q) -> RVector { return q.squaredNorm() * p - q.dot(p) * q; },
                      [](const RVector &p, const RVector &q) -> RVector { return p.squaredNorm() * q - q.dot(p) * p; }};
    s.hamiltonians = {h1, h2};
    return s;
}

// Components of an element of so(3) in the spatial_rotor basis, using Tr(X_a X_b) = -2 delta_ab.
inline RVector so3_components(const RMatrix &y)
{
    return RVector{{0.5 * (y(2, 1) - y(1, 2)), 0.5 * (y(0, 2) - y(2, 0)), 0.5 * (y(1, 0) - y(0, 1))}};
}

// A = -(d_i g) g^{-1} for g(t) = exp(alpha X_1) exp(beta X_2) exp(gamma X_3), with
// alpha = sin t_1 + t_2^2 / 2, beta = t_1 t_2, gamma = cos t_2.
inline GaugeField so3_pure_gauge()
{
    const auto sys = spatial_rotor();
    const auto gens = sys.action_gens;
    auto component = [gens](int i, int a) {
        return [gens, i, a](const RVector &t) {
            const double al = std::sin(t(0)) + 0.5 * t(1) * t(1);
            const double be = t(0) * t(1);
            const double dal[2] = {std::cos(t(0)), t(1)};
            const double dbe[2] = {t(1), t(0)};
            const double dga[2] = {0.0, -std::sin(t(1))};
            auto ex = [](const RMatrix &x) -> RMatrix { return matrix_exponential(x.cast<cplx>()).real(); };
            const RMatrix e1 = ex(al * gens[0]);
            const RMatrix e2 = ex(be * gens[1]);
            const RMatrix dg_ginv = dal[i] * gens[0] + dbe[i] * e1 * gens[1] * e1.transpose() + dga[i] * e1 * e2 * gens[2] * e2.transpose() * e1.transpose();
            return -so3_components(dg_ginv)(a);
        };
    };
    GaugeField g;
    for (int i = 0; i < 2; ++i) {
        std::vector<std::function<double(const RVector &)>> row;
        for (int a = 0; a < 3; ++a) {
            row.push_back(component(i, a));
        }
        g.components.push_back(std::move(row));
    }
    return g;
}

// Constant A_1 = X_1, A_2 = X_2: the derivatives vanish and [X_1, X_2] = X_3 survives.
inline GaugeField so3_non_flat()
{
    RMatrix v = RMatrix::Zero(2, 3);
    v(0, 0) = 1.0;
    v(1, 1) = 1.0;
    return GaugeField::constant(v);
}

} // namespace gaudin_lab::univar

#endif

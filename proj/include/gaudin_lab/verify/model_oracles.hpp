#ifndef GAUDIN_LAB_VERIFY_MODEL_ORACLES_HPP
#define GAUDIN_LAB_VERIFY_MODEL_ORACLES_HPP

// Reference implementations for the Gaudin models that share no code path
// with the library evaluation: an entrywise elliptic Lax matrix built on the
// lattice-sum Weierstrass functions, and a dense adaptive integration of the
// rational equations of motion on raw residue entries.

#include <vector>

#include <boost/numeric/odeint.hpp>

#include "gaudin_lab/gaudin_models.hpp"
#include "gaudin_lab/verify/oracles.hpp"

namespace gaudin_lab::oracle
{

inline CMatrix elliptic_lax_entrywise(const GaudinModel &model, const std::vector<CMatrix> &residues, const CVector &q, const CVector &p, cplx z)
{
    const LatticeWeierstrass w(model.cache().tau());
    const int m = model.m();
    // Diagonal Q and the constant term pi = Gram^{-1} p - sum_a C_a zeta(-p_a).
    std::vector<cplx> qd(static_cast<std::size_t>(m), 0.0), pd(static_cast<std::size_t>(m), 0.0);
    const CVector praised = model.basis().raise(p);
    for (int mu = 0; mu < m - 1; ++mu) {
        qd[static_cast<std::size_t>(mu)] += q(mu);
        qd[static_cast<std::size_t>(mu + 1)] -= q(mu);
        pd[static_cast<std::size_t>(mu)] += praised(mu);
        pd[static_cast<std::size_t>(mu + 1)] -= praised(mu);
    }
    CMatrix l = CMatrix::Zero(m, m);
    for (int r = 0; r < m; ++r) {
        l(r, r) = pd[static_cast<std::size_t>(r)];
    }
    for (std::size_t a = 0; a < residues.size(); ++a) {
        const cplx pa = model.marked_points()[a];
        for (int r = 0; r < m; ++r) {
            l(r, r) += residues[a](r, r) * (w.zeta(z - pa) - w.zeta(-pa));
            for (int c = 0; c < m; ++c) {
                if (r == c) {
                    continue;
                }
                const cplx u = qd[static_cast<std::size_t>(r)] - qd[static_cast<std::size_t>(c)];
                const cplx phi = w.sigma(u + z - pa) / (w.sigma(u) * w.sigma(z - pa)) * std::exp(-u * w.zeta(z) + u * w.zeta(pa));
                l(r, c) += residues[a](r, c) * phi;
            }
        }
    }
    return l;
}

// Rational equations of motion dL_a/dt = [grad P(L(q_i)) / (p_a - q_i), L_a],
// integrated with an adaptive Dormand-Prince scheme on the real and imaginary
// parts of every residue entry.
inline std::vector<CMatrix> rational_flow_dense(const GaudinModel &model, std::vector<CMatrix> residues, std::size_t i, double duration, double tol = 1e-12)
{
    using State = std::vector<double>;
    const int m = model.m();
    const std::size_t n_pts = residues.size();
    const std::size_t block = static_cast<std::size_t>(2 * m * m);
    auto pack = [&](const std::vector<CMatrix> &ls) {
        State x(n_pts * block);
        for (std::size_t a = 0; a < n_pts; ++a) {
            for (int r = 0; r < m; ++r) {
                for (int c = 0; c < m; ++c) {
                    const std::size_t k = a * block + static_cast<std::size_t>(2 * (r * m + c));
                    x[k] = ls[a](r, c).real();
                    x[k + 1] = ls[a](r, c).imag();
                }
            }
        }
        return x;
    };
    auto unpack = [&](const State &x) {
        std::vector<CMatrix> ls(n_pts, CMatrix(m, m));
        for (std::size_t a = 0; a < n_pts; ++a) {
            for (int r = 0; r < m; ++r) {
                for (int c = 0; c < m; ++c) {
                    const std::size_t k = a * block + static_cast<std::size_t>(2 * (r * m + c));
                    ls[a](r, c) = cplx(x[k], x[k + 1]);
                }
            }
        }
        return ls;
    };
    const cplx qi = model.ham_point(i);
    const int degree = model.poly(i).degree();
    auto rhs = [&](const State &x, State &dx, double) {
        const auto ls = unpack(x);
        CMatrix lq = CMatrix::Zero(m, m);
        for (std::size_t a = 0; a < n_pts; ++a) {
            lq += ls[a] / (qi - model.marked_points()[a]);
        }
        CMatrix y = CMatrix::Identity(m, m);
        for (int k = 1; k < degree; ++k) {
            y = y * lq;
        }
        y.diagonal().array() -= y.trace() / static_cast<double>(m);
        std::vector<CMatrix> d(n_pts);
        for (std::size_t a = 0; a < n_pts; ++a) {
            const CMatrix g = y / (model.marked_points()[a] - qi);
            d[a] = g * ls[a] - ls[a] * g;
        }
        dx = pack(d);
    };
    State x = pack(residues);
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_dense_output(tol, tol, ode::runge_kutta_dopri5<State>());
    ode::integrate_adaptive(stepper, rhs, x, 0.0, duration, duration / 100.0);
    return unpack(x);
}

} // namespace gaudin_lab::oracle

#endif

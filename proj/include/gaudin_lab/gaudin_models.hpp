#ifndef GAUDIN_LAB_GAUDIN_MODELS_HPP
#define GAUDIN_LAB_GAUDIN_MODELS_HPP

// Rational (genus 0) and elliptic (genus 1) Gaudin models: Lax matrices,
// Hamiltonians H_i = P_i(L(q_i)), their gradients, M-matrices, the transition
// function at the gluing point and the change of trivialization.
//
// Orbit elements are L_a = -phi_a Lambda_a phi_a^{-1}. In genus 1 the Cartan
// position Q = q^mu H_mu and its conjugate momentum p_mu are extra coordinates.

#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gaudin_lab/elliptic.hpp"
#include "gaudin_lab/errors.hpp"
#include "gaudin_lab/lie_core.hpp"

namespace gaudin_lab
{

struct HamiltonianSpec {
    cplx point;
    int degree = 2;
};

struct ModelSpec {
    int genus = 0;
    int m = 2;
    cplx tau{0.0, 1.0};
    std::vector<cplx> marked_points;
    std::vector<HamiltonianSpec> hamiltonians;
};

// Points closer than this (modulo the lattice in genus 1) count as coincident.
inline constexpr double coincidence_tolerance = 1e-8;

class GaudinModel
{
public:
    GaudinModel(ModelSpec spec, std::vector<CMatrix> seeds) : m_spec(std::move(spec)), m_basis(m_spec.m), m_seeds(std::move(seeds))
    {
        if (m_spec.genus != 0 && m_spec.genus != 1) {
            fail(ErrorKind::invalid_argument, "genus must be 0 or 1");
        }
        if (m_spec.genus == 1) {
            m_cache.emplace(m_spec.tau);
        }
        const auto &pts = m_spec.marked_points;
        if (pts.empty()) {
            fail(ErrorKind::invalid_argument, "at least one marked point is required");
        }
        if (m_seeds.size() != pts.size()) {
            fail(ErrorKind::dimension_mismatch, "one orbit seed per marked point is required");
        }
        for (const auto &s : m_seeds) {
            if (s.rows() != m_spec.m || s.cols() != m_spec.m) {
                fail(ErrorKind::dimension_mismatch, "orbit seed has the wrong size");
            }
            AlgebraElement check(s);
        }
        for (std::size_t a = 0; a < pts.size(); ++a) {
            if (!is_finite(pts[a])) {
                fail(ErrorKind::non_finite, "marked point");
            }
            if (m_spec.genus == 1 && separation(pts[a], 0.0) < coincidence_tolerance) {
                fail(ErrorKind::config, "coincident points: marked point at the gluing point 0");
            }
            for (std::size_t b = a + 1; b < pts.size(); ++b) {
                if (separation(pts[a], pts[b]) < coincidence_tolerance) {
                    fail(ErrorKind::config, "coincident points: marked points " + std::to_string(a) + " and " + std::to_string(b));
                }
            }
        }
        for (std::size_t i = 0; i < m_spec.hamiltonians.size(); ++i) {
            const auto &h = m_spec.hamiltonians[i];
            if (!is_finite(h.point)) {
                fail(ErrorKind::non_finite, "Hamiltonian point");
            }
            m_polys.emplace_back(h.degree);
            if (m_spec.genus == 1 && separation(h.point, 0.0) < coincidence_tolerance) {
                fail(ErrorKind::config, "coincident points: Hamiltonian point at the gluing point 0");
            }
            for (std::size_t a = 0; a < pts.size(); ++a) {
                if (separation(h.point, pts[a]) < coincidence_tolerance) {
                    fail(ErrorKind::config, "coincident points: Hamiltonian point " + std::to_string(i) + " equals marked point " + std::to_string(a));
                }
            }
        }
    }

    int genus() const noexcept
    {
        return m_spec.genus;
    }
    int m() const noexcept
    {
        return m_spec.m;
    }
    int rank() const noexcept
    {
        return m_spec.m - 1;
    }
    const ModelSpec &spec() const noexcept
    {
        return m_spec;
    }
    const LieBasis &basis() const noexcept
    {
        return m_basis;
    }
    const std::vector<cplx> &marked_points() const noexcept
    {
        return m_spec.marked_points;
    }
    const std::vector<CMatrix> &orbit_seeds() const noexcept
    {
        return m_seeds;
    }
    std::size_t num_points() const noexcept
    {
        return m_spec.marked_points.size();
    }
    std::size_t num_hamiltonians() const noexcept
    {
        return m_spec.hamiltonians.size();
    }
    cplx ham_point(std::size_t i) const
    {
        return m_spec.hamiltonians.at(i).point;
    }
    const InvariantPolynomial &poly(std::size_t i) const
    {
        return m_polys.at(i);
    }
    const EllipticCache &cache() const
    {
        if (!m_cache) {
            fail(ErrorKind::invalid_argument, "elliptic data requested from a genus-0 model");
        }
        return *m_cache;
    }

    // Distance between two points of the curve.
    double separation(cplx a, cplx b) const
    {
        return m_cache ? m_cache->lattice_distance(a - b) : std::abs(a - b);
    }

    void require_genus(int g, const char *what) const
    {
        if (m_spec.genus != g) {
            fail(ErrorKind::invalid_argument, std::string(what) + " needs a genus-" + std::to_string(g) + " model");
        }
    }

private:
    ModelSpec m_spec;
    LieBasis m_basis;
    std::vector<CMatrix> m_seeds;
    std::vector<InvariantPolynomial> m_polys;
    std::optional<EllipticCache> m_cache;
};

struct PhaseState {
    std::vector<CMatrix> phis;
    CVector q; // genus 1 only, Cartan coordinates q^mu
    CVector p; // genus 1 only, conjugate momenta p_mu
    RVector t; // multi-time
};

inline std::vector<CMatrix> orbit_elements(const GaudinModel &model, const PhaseState &state)
{
    if (state.phis.size() != model.num_points()) {
        fail(ErrorKind::dimension_mismatch, "one group point per marked point is required");
    }
    std::vector<CMatrix> out;
    out.reserve(state.phis.size());
    for (std::size_t a = 0; a < state.phis.size(); ++a) {
        const CMatrix &phi = state.phis[a];
        if (phi.rows() != model.m() || phi.cols() != model.m()) {
            fail(ErrorKind::dimension_mismatch, "group point has the wrong size");
        }
        Eigen::PartialPivLU<CMatrix> lu(phi);
        out.push_back(-phi * model.orbit_seeds()[a] * lu.inverse());
    }
    return out;
}

// Root values u_rc = Q_rr - Q_cc stored as a matrix.
inline CMatrix root_shifts(const GaudinModel &model, const CVector &q)
{
    if (q.size() != model.rank()) {
        fail(ErrorKind::dimension_mismatch, "Cartan coordinate vector has wrong length");
    }
    const CMatrix qd = model.basis().cartan_element(q);
    CMatrix u(model.m(), model.m());
    for (int r = 0; r < model.m(); ++r) {
        for (int c = 0; c < model.m(); ++c) {
            u(r, c) = qd(r, r) - qd(c, c);
        }
    }
    return u;
}

// Smallest distance from any root value rho(Q) to the lattice.
inline double resonance_distance(const GaudinModel &model, const CVector &q)
{
    const CMatrix u = root_shifts(model, q);
    double best = std::numeric_limits<double>::infinity();
    for (const auto &root : model.basis().roots()) {
        best = std::min(best, model.cache().lattice_distance(u(root.row, root.col)));
    }
    return best;
}

// Weight of a root component in the elliptic Lax and M matrices:
// kernel_phi(u, z, pole) exp(u zeta(pole)). The extra factor makes the
// residue at z = pole exactly 1.
struct RootWeight {
    cplx value;
    cplx dlog_du;
};

inline RootWeight root_weight(const EllipticCache &cache, cplx u, cplx z, cplx pole)
{
    const auto k = kernel_phi(cache, u, z, pole);
    const cplx zp = weierstrass_zeta(cache, pole);
    return {k.value * std::exp(u * zp), k.dlog_du + zp};
}

// Everything the Lax matrix needs that does not depend on z.
struct LaxData {
    std::vector<CMatrix> residues;
    CMatrix shifts;       // u_rc (genus 1)
    CMatrix momentum;     // sum_mu (Gram^{-1} p)^mu H_mu (genus 1)
    std::vector<cplx> zeta_at_points; // zeta(p_a) (genus 1)
};

inline LaxData make_lax_data(const GaudinModel &model, std::vector<CMatrix> residues, const CVector &q = {}, const CVector &p = {})
{
    LaxData d;
    d.residues = std::move(residues);
    if (model.genus() == 1) {
        if (p.size() != model.rank()) {
            fail(ErrorKind::dimension_mismatch, "momentum vector has wrong length");
        }
        if (resonance_distance(model, q) < pole_threshold) {
            fail(ErrorKind::resonance, "a root value rho(Q) lies on the lattice");
        }
        d.shifts = root_shifts(model, q);
        d.momentum = model.basis().cartan_element(model.basis().raise(p));
        for (cplx pa : model.marked_points()) {
            d.zeta_at_points.push_back(weierstrass_zeta(model.cache(), pa));
        }
    }
    return d;
}

inline LaxData lax_data(const GaudinModel &model, const PhaseState &state)
{
    return make_lax_data(model, orbit_elements(model, state), state.q, state.p);
}

inline CMatrix rational_lax_matrix(const GaudinModel &model, const LaxData &d, cplx z)
{
    CMatrix l = CMatrix::Zero(model.m(), model.m());
    for (std::size_t a = 0; a < d.residues.size(); ++a) {
        const cplx dz = z - model.marked_points()[a];
        if (std::abs(dz) < pole_threshold) {
            fail(ErrorKind::pole, "Lax matrix evaluated at marked point " + std::to_string(a));
        }
        l += d.residues[a] / dz;
    }
    return l;
}

inline CMatrix elliptic_lax_matrix(const GaudinModel &model, const LaxData &d, cplx z)
{
    const auto &cache = model.cache();
    const int m = model.m();
    if (cache.lattice_distance(z) < pole_threshold) {
        fail(ErrorKind::pole, "elliptic Lax matrix evaluated at the gluing point");
    }
    CMatrix l = d.momentum;
    for (std::size_t a = 0; a < d.residues.size(); ++a) {
        const cplx pa = model.marked_points()[a];
        if (cache.lattice_distance(z - pa) < pole_threshold) {
            fail(ErrorKind::pole, "Lax matrix evaluated at marked point " + std::to_string(a));
        }
        const cplx w = weierstrass_zeta(cache, z - pa) + d.zeta_at_points[a];
        const CMatrix &res = d.residues[a];
        for (int r = 0; r < m; ++r) {
            l(r, r) += res(r, r) * w;
            for (int c = 0; c < m; ++c) {
                if (r != c && res(r, c) != 0.0) {
                    l(r, c) += res(r, c) * root_weight(cache, d.shifts(r, c), z, pa).value;
                }
            }
        }
    }
    return l;
}

inline CMatrix lax_matrix(const GaudinModel &model, const LaxData &d, cplx z)
{
    return model.genus() == 0 ? rational_lax_matrix(model, d, z) : elliptic_lax_matrix(model, d, z);
}

inline AlgebraElement rational_lax(const GaudinModel &model, const PhaseState &state, cplx z)
{
    model.require_genus(0, "rational_lax");
    return AlgebraElement::project(rational_lax_matrix(model, lax_data(model, state), z));
}

inline AlgebraElement elliptic_lax(const GaudinModel &model, const PhaseState &state, cplx z)
{
    model.require_genus(1, "elliptic_lax");
    return AlgebraElement::project(elliptic_lax_matrix(model, lax_data(model, state), z));
}

// Cartan coordinates pi^mu of the constant term, recovered from p_mu.
inline CVector cartan_constant(const GaudinModel &model, const PhaseState &state)
{
    model.require_genus(1, "cartan_constant");
    const auto res = orbit_elements(model, state);
    CVector out = model.basis().raise(state.p);
    for (std::size_t a = 0; a < res.size(); ++a) {
        const CVector ca = model.basis().raise(model.basis().cartan_pairings(res[a]));
        out -= ca * weierstrass_zeta(model.cache(), -model.marked_points()[a]);
    }
    return out;
}

inline CMatrix transition_gamma(const GaudinModel &model, const PhaseState &state, cplx z)
{
    model.require_genus(1, "transition_gamma");
    if (std::abs(z) < pole_threshold) {
        fail(ErrorKind::pole, "transition function at z = 0");
    }
    const CMatrix qd = model.basis().cartan_element(state.q);
    CMatrix g = CMatrix::Zero(model.m(), model.m());
    for (int r = 0; r < model.m(); ++r) {
        g(r, r) = std::exp(qd(r, r) / z);
    }
    return g;
}

// gamma L gamma^{-1}: the Lax matrix in the trivialization around z = 0.
inline CMatrix glued_lax(const GaudinModel &model, const PhaseState &state, cplx z)
{
    const CMatrix g = transition_gamma(model, state, z);
    const CMatrix l = elliptic_lax_matrix(model, lax_data(model, state), z);
    CMatrix out(l.rows(), l.cols());
    for (Eigen::Index r = 0; r < l.rows(); ++r) {
        for (Eigen::Index c = 0; c < l.cols(); ++c) {
            out(r, c) = g(r, r) * l(r, c) / g(c, c);
        }
    }
    return out;
}

inline cplx hamiltonian(const GaudinModel &model, const PhaseState &state, std::size_t i)
{
    const auto d = lax_data(model, state);
    return model.poly(i).evaluate(lax_matrix(model, d, model.ham_point(i)));
}

struct HamiltonianGradient {
    cplx value;
    std::vector<CMatrix> dH_dL;
    CVector dH_dq;
    CVector dH_dp;
};

// Gradient of H_i: dH = sum_a Tr(dH_dL[a] dL_a) + dH_dq . dq + dH_dp . dp.
inline HamiltonianGradient grad_hamiltonian(const GaudinModel &model, const LaxData &d, std::size_t i)
{
    const cplx qi = model.ham_point(i);
    const CMatrix lq = lax_matrix(model, d, qi);
    const auto &poly = model.poly(i);
    const CMatrix y = poly.gradient(lq);
    HamiltonianGradient g;
    g.value = poly.evaluate(lq);
    const auto &pts = model.marked_points();
    if (model.genus() == 0) {
        for (cplx pa : pts) {
            g.dH_dL.push_back(y / (qi - pa));
        }
        return g;
    }
    const auto &cache = model.cache();
    const auto &basis = model.basis();
    const int m = model.m();
    g.dH_dq = CVector::Zero(model.rank());
    g.dH_dp = basis.raise(basis.cartan_pairings(y));
    for (std::size_t a = 0; a < pts.size(); ++a) {
        const cplx w = weierstrass_zeta(cache, qi - pts[a]) + d.zeta_at_points[a];
        CMatrix ga = CMatrix::Zero(m, m);
        for (int r = 0; r < m; ++r) {
            ga(r, r) = y(r, r) * w;
        }
        g.dH_dL.push_back(std::move(ga));
    }
    for (const auto &root : basis.roots()) {
        const int r = root.row, c = root.col;
        cplx du = 0.0;
        for (std::size_t a = 0; a < pts.size(); ++a) {
            const auto rw = root_weight(cache, d.shifts(r, c), qi, pts[a]);
            g.dH_dL[a](c, r) = y(c, r) * rw.value;
            du += d.residues[a](r, c) * rw.value * rw.dlog_du;
        }
        g.dH_dq += (y(c, r) * du) * root.on_cartan.cast<cplx>();
    }
    return g;
}

inline HamiltonianGradient grad_hamiltonian(const GaudinModel &model, const PhaseState &state, std::size_t i)
{
    return grad_hamiltonian(model, lax_data(model, state), i);
}

inline AlgebraElement m_matrix_rational(const GaudinModel &model, const PhaseState &state, std::size_t i, cplx z)
{
    model.require_genus(0, "m_matrix_rational");
    const cplx qi = model.ham_point(i);
    if (std::abs(z - qi) < pole_threshold) {
        fail(ErrorKind::pole, "M-matrix evaluated at its pole");
    }
    const auto d = lax_data(model, state);
    const CMatrix y = model.poly(i).gradient(rational_lax_matrix(model, d, qi));
    return AlgebraElement::project(y / (z - qi));
}

inline CMatrix elliptic_m_from_gradient(const GaudinModel &model, const LaxData &d, const CMatrix &y, cplx qi, cplx z)
{
    const auto &cache = model.cache();
    const int m = model.m();
    if (cache.lattice_distance(z - qi) < pole_threshold || cache.lattice_distance(z) < pole_threshold) {
        fail(ErrorKind::pole, "elliptic M-matrix evaluated at a pole");
    }
    const cplx w = weierstrass_zeta(cache, z - qi) - weierstrass_zeta(cache, z);
    CMatrix out = CMatrix::Zero(m, m);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            if (r == c) {
                out(r, r) = y(r, r) * w;
            } else if (y(r, c) != 0.0) {
                out(r, c) = y(r, c) * root_weight(cache, d.shifts(r, c), z, qi).value;
            }
        }
    }
    return out;
}

inline AlgebraElement m_matrix_elliptic(const GaudinModel &model, const PhaseState &state, std::size_t i, cplx z)
{
    model.require_genus(1, "m_matrix_elliptic");
    const auto d = lax_data(model, state);
    const cplx qi = model.ham_point(i);
    const CMatrix y = model.poly(i).gradient(elliptic_lax_matrix(model, d, qi));
    return AlgebraElement::project(elliptic_m_from_gradient(model, d, y, qi, z));
}

inline AlgebraElement m_matrix(const GaudinModel &model, const PhaseState &state, std::size_t i, cplx z)
{
    return model.genus() == 0 ? m_matrix_rational(model, state, i, z) : m_matrix_elliptic(model, state, i, z);
}

// c_1(z) = zeta(z) + 2 eta_1 (z taubar - zbar tau)/(tau - taubar) - 2 eta_2 (z - zbar)/(tau - taubar),
// so that f_1(z) = exp(Q c_1(z)) is doubly periodic up to a constant conjugation.
inline cplx trivialization_exponent(const EllipticCache &cache, cplx z)
{
    const cplx tau = cache.tau();
    const cplx tb = std::conj(tau);
    const cplx zb = std::conj(z);
    return weierstrass_zeta(cache, z) + 2.0 * cache.eta1() * (z * tb - zb * tau) / (tau - tb) - 2.0 * cache.eta2() * (z - zb) / (tau - tb);
}

inline CMatrix change_of_trivialization(const GaudinModel &model, const PhaseState &state, cplx z)
{
    model.require_genus(1, "change_of_trivialization");
    const CMatrix qd = model.basis().cartan_element(state.q);
    const cplx c1 = trivialization_exponent(model.cache(), z);
    CMatrix f = CMatrix::Zero(model.m(), model.m());
    for (int r = 0; r < model.m(); ++r) {
        f(r, r) = std::exp(qd(r, r) * c1);
    }
    return f;
}

struct Retrivialization {
    CMatrix by_conjugation;
    CMatrix by_assembly;
};

// The Lax matrix in the non-holomorphic trivialization, computed (a) as
// f_1 L f_1^{-1} and (b) assembled directly from sigma quotients.
inline Retrivialization retrivialize(const GaudinModel &model, const PhaseState &state, cplx z)
{
    model.require_genus(1, "retrivialize");
    const auto &cache = model.cache();
    const auto d = lax_data(model, state);
    const CMatrix l = elliptic_lax_matrix(model, d, z);
    const CMatrix f = change_of_trivialization(model, state, z);
    const int m = model.m();

    Retrivialization out;
    out.by_conjugation = CMatrix(m, m);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            out.by_conjugation(r, c) = f(r, r) * l(r, c) / f(c, c);
        }
    }

    const cplx tau = cache.tau();
    const cplx k = cplx(0.0, 2.0 * pi) / (tau - std::conj(tau));
    out.by_assembly = CMatrix::Zero(m, m);
    for (int r = 0; r < m; ++r) {
        out.by_assembly(r, r) = l(r, r);
    }
    for (std::size_t a = 0; a < d.residues.size(); ++a) {
        const cplx pa = model.marked_points()[a];
        const CMatrix fa = change_of_trivialization(model, state, pa);
        const cplx s_zp = weierstrass_sigma(cache, z - pa);
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                if (r == c) {
                    continue;
                }
                const cplx u = d.shifts(r, c);
                const cplx tilde = fa(r, r) * d.residues[a](r, c) / fa(c, c);
                const cplx ratio = weierstrass_sigma(cache, u + z - pa) / (weierstrass_sigma(cache, u) * s_zp);
                const cplx phase = std::exp(u * k * (z - std::conj(z)) - u * k * (pa - std::conj(pa)) - 2.0 * cache.eta1() * u * (z - pa));
                out.by_assembly(r, c) += tilde * ratio * phase;
            }
        }
    }
    return out;
}

// Orbit seed and group point with L = -phi Lambda phi^{-1}.
struct OrbitFactor {
    CMatrix seed;
    CMatrix phi;
};

inline OrbitFactor factor_residue(const CMatrix &residue)
{
    const int m = static_cast<int>(residue.rows());
    if (residue.norm() == 0.0) {
        return {CMatrix::Zero(m, m), CMatrix::Identity(m, m)};
    }
    Eigen::ComplexEigenSolver<CMatrix> es(-residue);
    if (es.info() != Eigen::Success) {
        fail(ErrorKind::invalid_argument, "eigendecomposition of a residue failed");
    }
    CVector lam = es.eigenvalues();
    lam.array() -= lam.sum() / static_cast<double>(m);
    OrbitFactor out{lam.asDiagonal(), es.eigenvectors()};
    Eigen::PartialPivLU<CMatrix> lu(out.phi);
    const CMatrix back = -out.phi * out.seed * lu.inverse();
    if (!all_finite(back) || (back - residue).norm() > 1e-8 * (1.0 + residue.norm())) {
        fail(ErrorKind::invalid_argument, "residue is not diagonalizable");
    }
    return out;
}

struct ModelAndState {
    GaudinModel model;
    PhaseState state;
};

inline void check_residue_constraint(const ModelSpec &spec, const std::vector<CMatrix> &residues, double tol)
{
    CMatrix sum = CMatrix::Zero(spec.m, spec.m);
    double scale = 0.0;
    for (const auto &r : residues) {
        sum += r;
        scale = std::max(scale, r.norm());
    }
    if (spec.genus == 1) {
        sum = sum.diagonal().asDiagonal();
    }
    if (sum.norm() > tol * std::max(scale, 1.0)) {
        fail(ErrorKind::config, spec.genus == 0 ? "residues must sum to zero" : "Cartan parts of the residues must sum to zero");
    }
}

// Builds orbit seeds and group points from prescribed residues.
inline ModelAndState model_from_residues(const ModelSpec &spec, const std::vector<CMatrix> &residues, CVector q = {}, CVector p = {})
{
    check_residue_constraint(spec, residues, 1e-10);
    std::vector<CMatrix> seeds, phis;
    for (const auto &r : residues) {
        AlgebraElement check(r);
        auto f = factor_residue(r);
        seeds.push_back(std::move(f.seed));
        phis.push_back(std::move(f.phi));
    }
    GaudinModel model(spec, std::move(seeds));
    PhaseState state;
    state.phis = std::move(phis);
    state.t = RVector::Zero(static_cast<Eigen::Index>(spec.hamiltonians.size()));
    if (spec.genus == 1) {
        state.q = q.size() ? q : CVector(CVector::Zero(spec.m - 1));
        state.p = p.size() ? p : CVector(CVector::Zero(spec.m - 1));
    }
    return {std::move(model), std::move(state)};
}

inline cplx random_complex(std::mt19937_64 &rng, double scale)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    const double re = nd(rng);
    const double im = nd(rng);
    return scale * cplx(re, im);
}

// Random residues obeying the residue constraint; genus 1 also draws a
// non-resonant Q (every root value at least `margin` from the lattice) and p.
inline ModelAndState random_configuration(const ModelSpec &spec, std::mt19937_64 &rng, double scale = 1.0, double margin = 0.05)
{
    const int m = spec.m;
    const std::size_t n_pts = spec.marked_points.size();
    std::vector<CMatrix> residues;
    CMatrix sum = CMatrix::Zero(m, m);
    for (std::size_t a = 0; a < n_pts; ++a) {
        CMatrix x(m, m);
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                x(r, c) = random_complex(rng, scale);
            }
        }
        x.diagonal().array() -= x.trace() / static_cast<double>(m);
        if (a + 1 == n_pts) {
            if (spec.genus == 0) {
                x = -sum;
            } else {
                x.diagonal() = -sum.diagonal();
            }
        }
        sum += x;
        residues.push_back(std::move(x));
    }
    CVector q, p;
    if (spec.genus == 1) {
        const EllipticCache cache(spec.tau);
        std::uniform_real_distribution<double> ud(-0.5, 0.5);
        GaudinModel probe(spec, std::vector<CMatrix>(n_pts, CMatrix::Zero(m, m)));
        for (int attempt = 0;; ++attempt) {
            q = CVector(m - 1);
            for (int mu = 0; mu < m - 1; ++mu) {
                const double re = ud(rng);
                const double im = ud(rng);
                q(mu) = cplx(0.6 * re, 0.3 * im * spec.tau.imag());
            }
            if (resonance_distance(probe, q) >= margin) {
                break;
            }
            if (attempt > 1000) {
                fail(ErrorKind::invalid_argument, "could not draw a non-resonant Cartan position");
            }
        }
        p = CVector(m - 1);
        for (int mu = 0; mu < m - 1; ++mu) {
            p(mu) = random_complex(rng, scale);
        }
    }
    return model_from_residues(spec, residues, q, p);
}

// Structural checks on a state: sizes, finiteness, invertible group points,
// residue constraint, non-resonance.
inline void validate_state(const GaudinModel &model, const PhaseState &state, double tol = 1e-10)
{
    if (state.phis.size() != model.num_points()) {
        fail(ErrorKind::dimension_mismatch, "one group point per marked point is required");
    }
    for (const auto &phi : state.phis) {
        if (phi.rows() != model.m() || phi.cols() != model.m()) {
            fail(ErrorKind::dimension_mismatch, "group point has the wrong size");
        }
        if (!all_finite(phi)) {
            fail(ErrorKind::non_finite, "group point");
        }
        if (std::abs(phi.determinant()) < 1e-14 * std::pow(std::max(phi.norm(), 1e-300), model.m())) {
            fail(ErrorKind::invalid_argument, "group point is singular");
        }
    }
    if (model.genus() == 1) {
        if (state.q.size() != model.rank() || state.p.size() != model.rank()) {
            fail(ErrorKind::dimension_mismatch, "Cartan coordinates have wrong length");
        }
        if (!all_finite(state.q) || !all_finite(state.p)) {
            fail(ErrorKind::non_finite, "Cartan coordinates");
        }
        if (resonance_distance(model, state.q) < pole_threshold) {
            fail(ErrorKind::resonance, "a root value rho(Q) lies on the lattice");
        }
    }
    check_residue_constraint(model.spec(), orbit_elements(model, state), tol);
}

} // namespace gaudin_lab

#endif

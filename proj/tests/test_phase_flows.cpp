#include <random>

#include <gtest/gtest.h>

#include "gaudin_lab/phase_flows.hpp"
#include "gaudin_lab/verify/model_oracles.hpp"

using namespace gaudin_lab;

namespace
{

ModelSpec rational_sl2()
{
    ModelSpec s;
    s.genus = 0;
    s.m = 2;
    s.marked_points = {0.0, 1.0, cplx(0.4, 0.9)};
    s.hamiltonians = {{cplx(2.0, 0.5), 2}, {cplx(-1.0, -0.7), 2}};
    return s;
}

ModelSpec elliptic_sl2(int n_points)
{
    ModelSpec s;
    s.genus = 1;
    s.m = 2;
    s.tau = cplx(0.1, 1.1);
    s.marked_points = {cplx(0.21, 0.13)};
    if (n_points == 2) {
        s.marked_points.push_back(cplx(-0.27, 0.31));
    }
    s.hamiltonians = {{cplx(0.33, -0.22), 2}, {cplx(-0.11, 0.41), 2}};
    return s;
}

FlowCurve curve(std::vector<std::vector<double>> pts)
{
    FlowCurve c;
    for (const auto &p : pts) {
        c.waypoints.push_back(Eigen::Map<const RVector>(p.data(), static_cast<Eigen::Index>(p.size())));
    }
    return c;
}

double state_gap(const GaudinModel &model, const PhaseState &a, const PhaseState &b)
{
    const auto la = orbit_elements(model, a);
    const auto lb = orbit_elements(model, b);
    double g = 0.0;
    for (std::size_t k = 0; k < la.size(); ++k) {
        g += (la[k] - lb[k]).norm();
    }
    return g;
}

} // namespace

TEST(VectorField, ReproducesRationalEquationOfMotion)
{
    std::mt19937_64 rng(1);
    const auto ms = random_configuration(rational_sl2(), rng);
    const auto res = orbit_elements(ms.model, ms.state);
    const cplx qi = ms.model.ham_point(0);
    const CMatrix lq = rational_lax(ms.model, ms.state, qi).matrix();
    const auto t = hamiltonian_vector_field(ms.model, ms.state, 0);
    for (std::size_t a = 0; a < res.size(); ++a) {
        const CMatrix expect = commutator(lq / (ms.model.marked_points()[a] - qi), res[a]);
        EXPECT_LT((t.dL[a] - expect).norm(), 1e-12 * (1.0 + expect.norm()));
        EXPECT_LT(std::abs(t.dL[a].trace()), 1e-13);
        EXPECT_LT(std::abs((res[a] * t.dL[a]).trace()), 1e-12);
    }
}

TEST(VectorField, CommutingResiduesDoNotMove)
{
    CMatrix x(2, 2);
    x << cplx(0.3, 0.1), cplx(0.5, 0.0), cplx(-0.2, 0.4), cplx(-0.3, -0.1);
    const auto ms = model_from_residues(rational_sl2(), {x, 2.0 * x, -3.0 * x});
    const auto t = hamiltonian_vector_field(ms.model, ms.state, 0);
    for (const auto &d : t.dL) {
        EXPECT_LT(d.norm(), 1e-12);
    }
}

TEST(Step, RejectsNonPositiveStep)
{
    std::mt19937_64 rng(2);
    const auto ms = random_configuration(rational_sl2(), rng);
    EXPECT_THROW(step(ms.model, ms.state, 0, 0.0, StepMethod::rk4), LabError);
    EXPECT_THROW(step(ms.model, ms.state, 0, -1e-3, StepMethod::conjugation), LabError);
    PhaseState bad = ms.state;
    bad.phis[0](0, 0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(step(ms.model, bad, 0, 1e-3, StepMethod::rk4), LabError);
}

TEST(Step, TrivialSinglePointStateIsFixed)
{
    ModelSpec s = rational_sl2();
    s.marked_points = {0.3};
    const auto ms = model_from_residues(s, {CMatrix::Zero(2, 2)});
    const auto next = step(ms.model, ms.state, 0, 1e-2, StepMethod::rk4);
    EXPECT_EQ((next.phis[0] - ms.state.phis[0]).norm(), 0.0);
}

TEST(Step, ConjugationPreservesSpectrumOverManySteps)
{
    std::mt19937_64 rng(3);
    const auto ms = random_configuration(rational_sl2(), rng, 0.5);
    PhaseState s = ms.state;
    for (int k = 0; k < 10000; ++k) {
        s = step(ms.model, s, 0, 1e-3, StepMethod::conjugation);
    }
    const auto res = orbit_elements(ms.model, s);
    for (std::size_t a = 0; a < res.size(); ++a) {
        const CVector c = characteristic_coefficients(res[a]);
        const CVector c0 = characteristic_coefficients(-ms.model.orbit_seeds()[a]);
        EXPECT_LT((c - c0).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + c0.cwiseAbs().maxCoeff()));
    }
}

TEST(Step, ConvergenceOrders)
{
    std::mt19937_64 rng(4);
    const auto ms = random_configuration(rational_sl2(), rng, 1.0);
    const auto c = curve({{0.0, 0.0}, {0.5, 0.0}});
    const PhaseState ref = evolve(ms.model, ms.state, c, 1e-4, StepMethod::rk4).samples.back().state;
    for (auto method : {StepMethod::rk4, StepMethod::conjugation}) {
        std::vector<double> hs, errs;
        for (double h : {0.02, 0.01, 0.005}) {
            const auto tr = evolve(ms.model, ms.state, c, h, method);
            hs.push_back(h);
            errs.push_back(state_gap(ms.model, tr.samples.back().state, ref));
        }
        const double order = oracle::fitted_order(hs, errs);
        if (method == StepMethod::rk4) {
            EXPECT_NEAR(order, 4.0, 0.3);
        } else {
            EXPECT_NEAR(order, 2.0, 0.3);
        }
    }
}

TEST(Evolve, ZeroLengthCurve)
{
    std::mt19937_64 rng(5);
    const auto ms = random_configuration(rational_sl2(), rng);
    const auto tr = evolve(ms.model, ms.state, curve({{0.0, 0.0}}), 1e-2);
    ASSERT_EQ(tr.samples.size(), 1u);
    EXPECT_EQ(state_gap(ms.model, tr.samples[0].state, ms.state), 0.0);
    EXPECT_EQ(action_along_curve(ms.model, tr), cplx(0.0));
}

TEST(Evolve, RejectsDiagonalSegments)
{
    std::mt19937_64 rng(6);
    const auto ms = random_configuration(rational_sl2(), rng);
    EXPECT_THROW(evolve(ms.model, ms.state, curve({{0.0, 0.0}, {1.0, 1.0}}), 1e-2), LabError);
    EXPECT_THROW(evolve(ms.model, ms.state, curve({{0.0, 0.0, 0.0}}), 1e-2), LabError);
}

TEST(Evolve, MatchesDenseOracle)
{
    std::mt19937_64 rng(7);
    const auto ms = random_configuration(rational_sl2(), rng, 1.0);
    const auto tr = evolve(ms.model, ms.state, curve({{0.0, 0.0}, {1.0, 0.0}}), 1e-3);
    const auto fin = orbit_elements(ms.model, tr.samples.back().state);
    const auto ref = oracle::rational_flow_dense(ms.model, orbit_elements(ms.model, ms.state), 0, 1.0);
    for (std::size_t a = 0; a < fin.size(); ++a) {
        EXPECT_LT((fin[a] - ref[a]).norm(), 1e-6);
    }
}

TEST(Evolve, BackwardSegmentsReturnToStart)
{
    std::mt19937_64 rng(8);
    const auto ms = random_configuration(rational_sl2(), rng, 0.5);
    const auto tr = evolve(ms.model, ms.state, curve({{0.0, 0.0}, {0.4, 0.0}, {0.0, 0.0}}), 1e-3);
    EXPECT_LT(state_gap(ms.model, tr.samples.back().state, ms.state), 1e-10);
}

TEST(Bracket, AntisymmetryAndInvolutivity)
{
    std::mt19937_64 rng(9);
    for (int k = 0; k < 20; ++k) {
        const auto ms = random_configuration(rational_sl2(), rng);
        EXPECT_EQ(poisson_bracket(ms.model, ms.state, 0, 0), cplx(0.0));
        const auto b = poisson_bracket_scaled(ms.model, ms.state, 0, 1);
        EXPECT_LT(std::abs(b.value), 1e-10 * std::max(1.0, b.scale));
        EXPECT_LT(std::abs(b.value + poisson_bracket(ms.model, ms.state, 1, 0)), 1e-14 * std::max(1.0, b.scale));
    }
}

TEST(Bracket, MatchesFlowDerivative)
{
    // A linear function of one residue does not commute with H_0.
    std::mt19937_64 rng(10);
    const auto ms = random_configuration(rational_sl2(), rng);
    const auto d = lax_data(ms.model, ms.state);
    const auto g0 = grad_hamiltonian(ms.model, d, 0);
    // F = Tr(L_0 X) for fixed X.
    CMatrix x(2, 2);
    x << 0.3, cplx(0.0, 1.0), -0.7, -0.3;
    HamiltonianGradient gf;
    gf.dH_dL = {x, CMatrix::Zero(2, 2), CMatrix::Zero(2, 2)};
    const cplx br = gradient_bracket(d.residues, g0, gf);
    auto f_along = [&](double t) {
        const auto s = advance(ms.model, ms.state, 0, t, StepMethod::rk4);
        return (orbit_elements(ms.model, s)[0] * x).trace();
    };
    const double h = 1e-3;
    const cplx d1 = (f_along(h) - f_along(-h)) / (2.0 * h);
    const cplx d2 = (f_along(h / 2) - f_along(-h / 2)) / h;
    const cplx rich = (4.0 * d2 - d1) / 3.0;
    EXPECT_LT(std::abs(rich - br), 1e-6 * (1.0 + std::abs(br)));
    EXPECT_GT(std::abs(br), 1e-3);
}

TEST(Bracket, EllipticInvolutivity)
{
    std::mt19937_64 rng(11);
    for (int n : {1, 2}) {
        for (int k = 0; k < 10; ++k) {
            const auto ms = random_configuration(elliptic_sl2(n), rng, 0.5);
            const auto b = poisson_bracket_scaled(ms.model, ms.state, 0, 1);
            EXPECT_LT(std::abs(b.value), 1e-8 * std::max(1.0, b.scale));
        }
    }
}

TEST(Bracket, EllipticBracketMatchesFlowDerivative)
{
    std::mt19937_64 rng(12);
    const auto ms = random_configuration(elliptic_sl2(2), rng, 0.3, 0.3);
    // H_1 against the momentum p: {H_0, p} = -dH_0/dq.
    const auto g0 = grad_hamiltonian(ms.model, ms.state, 0);
    auto p_along = [&](double t) { return advance(ms.model, ms.state, 0, t, StepMethod::rk4).p(0); };
    const double h = 1e-4;
    const cplx d1 = (p_along(h) - p_along(-h)) / (2.0 * h);
    const cplx d2 = (p_along(h / 2) - p_along(-h / 2)) / h;
    const cplx d = (4.0 * d2 - d1) / 3.0;
    EXPECT_LT(std::abs(d + g0.dH_dq(0)), 1e-7 * (1.0 + std::abs(g0.dH_dq(0))));
}

TEST(Action, OnShellPathIndependenceAtSecondOrder)
{
    std::mt19937_64 rng(13);
    const auto ms = random_configuration(rational_sl2(), rng, 0.7);
    const auto c1 = curve({{0.0, 0.0}, {0.5, 0.0}, {0.5, 0.5}});
    const auto c2 = curve({{0.0, 0.0}, {0.0, 0.5}, {0.5, 0.5}});
    std::vector<double> hs, gaps;
    for (double h : {0.02, 0.01, 0.005}) {
        const cplx a1 = action_along_curve(ms.model, evolve(ms.model, ms.state, c1, h));
        const cplx a2 = action_along_curve(ms.model, evolve(ms.model, ms.state, c2, h));
        hs.push_back(h);
        gaps.push_back(std::abs(a1 - a2));
    }
    EXPECT_GT(oracle::fitted_order(hs, gaps), 1.7);
    EXPECT_LT(gaps.back(), 1e-6);
}

TEST(Action, OnShellIntegrandIsDegreeMinusOneTimesH)
{
    std::mt19937_64 rng(14);
    const auto ms = random_configuration(rational_sl2(), rng, 0.7);
    const auto tr = evolve(ms.model, ms.state, curve({{0.0, 0.0}, {0.3, 0.0}}), 1e-3);
    const cplx expect = hamiltonian(ms.model, ms.state, 0) * 0.3;
    EXPECT_LT(std::abs(action_along_curve(ms.model, tr) - expect), 1e-5 * (1.0 + std::abs(expect)));
}

TEST(Diagnostics, SinglePointHasNoDrift)
{
    ModelSpec s = rational_sl2();
    s.marked_points = {0.3};
    const auto ms = model_from_residues(s, {CMatrix::Zero(2, 2)});
    const auto tr = evolve(ms.model, ms.state, curve({{0.0, 0.0}, {0.5, 0.0}, {0.5, 0.5}}), 0.01);
    const auto rep = diagnostics(ms.model, tr, {cplx(1.0, 1.0)});
    for (double v : rep.hamiltonian_drift) {
        EXPECT_EQ(v, 0.0);
    }
    EXPECT_EQ(rep.casimir_drift[0], 0.0);
    EXPECT_EQ(rep.residue_sum_drift, 0.0);
    EXPECT_EQ(rep.isospectral_drift, 0.0);
    EXPECT_EQ(rep.zero_curvature_residual, 0.0);
    EXPECT_EQ(rep.residue_sum_mode, "monitor");
}

TEST(Diagnostics, RationalRunIsConservative)
{
    std::mt19937_64 rng(15);
    const auto ms = random_configuration(rational_sl2(), rng, 0.5);
    const auto tr = evolve(ms.model, ms.state, curve({{0.0, 0.0}, {0.5, 0.0}, {0.5, 0.5}}), 1e-3);
    const auto rep = diagnostics(ms.model, tr, {cplx(0.5, -0.5), cplx(2.0, 1.0)});
    EXPECT_LT(rep.hamiltonian_drift[0], 1e-8);
    EXPECT_LT(rep.isospectral_drift, 1e-8);
    EXPECT_LT(rep.residue_sum_drift, 1e-8);
    EXPECT_LT(rep.closure_values[0][1], 1e-10);
    EXPECT_GT(rep.zero_curvature_residual, 0.0);
    EXPECT_LT(rep.zero_curvature_residual, 1e-2);
}

TEST(Diagnostics, PlaquetteResidualVanishesAtFirstOrder)
{
    std::mt19937_64 rng(16);
    const auto ms = random_configuration(rational_sl2(), rng, 0.7);
    std::vector<double> hs, rs;
    for (double h : {1e-2, 5e-3, 2.5e-3}) {
        hs.push_back(h);
        rs.push_back(plaquette_residual(ms.model, ms.state, 0, 1, cplx(0.5, -0.5), h));
    }
    EXPECT_NEAR(oracle::fitted_order(hs, rs), 1.0, 0.3);
}

TEST(EvolveChecked, CalogeroMoserCollisionAborts)
{
    // Attractive sl_2 Calogero-Moser pair: real q falls into the collision q -> 0.
    ModelSpec s;
    s.genus = 1;
    s.m = 2;
    s.tau = cplx(0.0, 1.0);
    s.marked_points = {cplx(0.25, 0.25)};
    s.hamiltonians = {{cplx(-0.25, 0.3), 2}};
    CMatrix l(2, 2);
    l << 0.0, 1.0, 1.0, 0.0;
    const auto ms = model_from_residues(s, {l}, CVector::Constant(1, 0.3), CVector::Zero(1));
    FlowCurve c;
    c.waypoints = {RVector::Zero(1), RVector::Constant(1, 5.0)};
    const auto r = evolve_checked(ms.model, ms.state, c, 1e-3);
    ASSERT_TRUE(r.abort.has_value());
    EXPECT_GT(r.abort->last_good_t(0), 0.0);
    EXPECT_LT(r.abort->last_good_t(0), 5.0);
    EXPECT_THROW(evolve(ms.model, ms.state, c, 1e-3), LabError);
}

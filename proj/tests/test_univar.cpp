#include <random>

#include <gtest/gtest.h>

#include "gaudin_lab/univar.hpp"
#include "gaudin_lab/verify/oracles.hpp"

using namespace gaudin_lab;
using namespace gaudin_lab::univar;

namespace
{

RVector random_vector(std::mt19937_64 &rng, int n, double scale = 1.0)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    RVector v(n);
    for (int k = 0; k < n; ++k) {
        v(k) = u(rng);
    }
    return v;
}

// Gradient of a value function by central differences.
RVector fd_gradient(const std::function<double(const RVector &)> &f, const RVector &x, double h = 1e-5)
{
    RVector g(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        RVector xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        g(k) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

double drift(const ToySystem &sys, const std::vector<CanonicalState> &traj)
{
    const RVector mu0 = noether_moment(sys, traj.front().p, traj.front().q);
    double d = 0.0;
    for (const auto &s : traj) {
        d = std::max(d, (noether_moment(sys, s.p, s.q) - mu0).norm());
    }
    return d;
}

} // namespace

TEST(Toy, GeneratorsCloseAndHamiltoniansAreInvariant)
{
    std::mt19937_64 rng(1);
    for (const auto &sys : {planar_rotor(), spatial_rotor()}) {
        EXPECT_NO_THROW(sys.validate());
        EXPECT_LT(generator_closure_residual(sys), 1e-12);
        for (int k = 0; k < 10; ++k) {
            EXPECT_LT(invariance_residual(sys, random_vector(rng, sys.m), random_vector(rng, sys.m)), 1e-8);
        }
    }
}

TEST(Toy, AnalyticGradientsMatchFiniteDifferences)
{
    std::mt19937_64 rng(2);
    for (const auto &sys : {planar_rotor(), spatial_rotor()}) {
        const RVector p = random_vector(rng, sys.m), q = random_vector(rng, sys.m);
        for (const auto &h : sys.hamiltonians) {
            const RVector gp = fd_gradient([&](const RVector &x) { return h.value(x, q); }, p);
            const RVector gq = fd_gradient([&](const RVector &x) { return h.value(p, x); }, q);
            EXPECT_LT((gp - h.grad_p(p, q)).norm(), 1e-8);
            EXPECT_LT((gq - h.grad_q(p, q)).norm(), 1e-8);
        }
    }
}

TEST(Noether, Examples)
{
    const auto sys = planar_rotor();
    EXPECT_EQ(noether_moment(sys, RVector::Zero(2), RVector{{0.3, 0.4}})(0), 0.0);
    const RVector p{{0.7, -0.2}}, q{{0.1, 0.9}};
    EXPECT_NEAR(noether_moment(sys, p, q)(0), p(0) * q(1) - p(1) * q(0), 1e-15);
    EXPECT_THROW(noether_moment(sys, RVector::Zero(3), q), LabError);
}

TEST(Noether, ConservedAtFourthOrder)
{
    const auto sys = spatial_rotor();
    const auto gauge = GaugeField::zero(2, 3);
    const CanonicalState s0{RVector{{0.4, -0.3, 0.8}}, RVector{{1.0, 0.2, -0.5}}};
    for (int i = 0; i < 2; ++i) {
        std::vector<double> hs, ds;
        for (double h : {0.1, 0.05, 0.025}) {
            hs.push_back(h);
            ds.push_back(drift(sys, gauged_flow(sys, gauge, s0, RVector::Zero(2), i, 1.0, h)));
        }
        // Drift bounded by C h^4; the measured rate may be higher.
        EXPECT_GT(oracle::fitted_order(hs, ds), 3.7) << "time " << i;
        EXPECT_LT(ds.back(), 1e-5);
    }
}

TEST(Gauged, ZeroFieldReducesToHamiltonianFlow)
{
    const auto sys = planar_rotor();
    const RVector p{{0.3, 0.1}}, q{{-0.2, 0.8}};
    const auto d = gauged_rhs(sys, p, q, RVector::Zero(2), GaugeField::zero(2, 1));
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ((d[i].dq - sys.hamiltonians[i].grad_p(p, q)).norm(), 0.0);
        EXPECT_EQ((d[i].dp + sys.hamiltonians[i].grad_q(p, q)).norm(), 0.0);
    }
}

TEST(Gauged, PureGaugeDirectionIsGroupOrbit)
{
    // H = 0 so that only the constant gauge term drives the flow.
    auto sys = spatial_rotor();
    for (auto &h : sys.hamiltonians) {
        h.value = [](const RVector &, const RVector &) { return 0.0; };
        h.grad_p = [](const RVector &p, const RVector &) -> RVector { return RVector::Zero(p.size()); };
        h.grad_q = h.grad_p;
    }
    RMatrix a(2, 3);
    a << 0.3, -0.7, 0.2, 0.0, 0.5, 1.1;
    const auto gauge = GaugeField::constant(a);
    const CanonicalState s0{RVector{{0.4, -0.3, 0.8}}, RVector{{1.0, 0.2, -0.5}}};
    for (int i = 0; i < 2; ++i) {
        const auto traj = gauged_flow(sys, gauge, s0, RVector::Zero(2), i, 1.0, 1e-3);
        RMatrix gen = RMatrix::Zero(3, 3);
        for (int b = 0; b < 3; ++b) {
            gen += a(i, b) * sys.action_gens[static_cast<std::size_t>(b)];
        }
        const RMatrix g = matrix_exponential(gen.cast<cplx>()).real();
        EXPECT_LT((traj.back().q - g * s0.q).norm(), 1e-12);
        // Rotations are orthogonal, so p moves by the same rotation.
        EXPECT_LT((traj.back().p - g * s0.p).norm(), 1e-12);
    }
}

TEST(Gauged, ZeroMomentIsPreserved)
{
    const auto sys = spatial_rotor();
    const auto gauge = so3_pure_gauge();
    const RVector q{{0.6, -0.2, 0.4}};
    const CanonicalState s0{-0.5 * q, q};
    ASSERT_LT(noether_moment(sys, s0.p, s0.q).norm(), 1e-15);
    for (int i = 0; i < 2; ++i) {
        std::vector<double> hs, ds;
        for (double h : {0.04, 0.02, 0.01}) {
            hs.push_back(h);
            ds.push_back(drift(sys, gauged_flow(sys, gauge, s0, RVector{{0.1, 0.2}}, i, 1.0, h)));
        }
        // A trivial flow keeps mu at roundoff and has no measurable rate.
        if (ds.front() > 1e-13) {
            EXPECT_GT(oracle::fitted_order(hs, ds), 3.7) << "time " << i;
        }
        EXPECT_LT(ds.back(), 1e-8);
    }
}

TEST(Gauged, NonzeroMomentRotatesUnderGauge)
{
    // With mu != 0 the gauge term acts on mu by the coadjoint action; |mu| is preserved.
    const auto sys = spatial_rotor();
    const auto gauge = so3_non_flat();
    const CanonicalState s0{RVector{{0.4, -0.3, 0.8}}, RVector{{1.0, 0.2, -0.5}}};
    const auto traj = gauged_flow(sys, gauge, s0, RVector::Zero(2), 0, 1.0, 1e-3);
    const double n0 = noether_moment(sys, s0.p, s0.q).norm();
    const double n1 = noether_moment(sys, traj.back().p, traj.back().q).norm();
    EXPECT_NEAR(n0, n1, 1e-10);
    EXPECT_GT(drift(sys, traj), 1e-2);
}

TEST(Flatness, ConstantAbelianFieldIsFlat)
{
    const auto f = planar_rotor().structure_consts;
    RMatrix a(2, 1);
    a << 0.4, -1.3;
    EXPECT_LT(max_abs(check_flatness(GaugeField::constant(a), RVector{{0.2, 0.7}}, f)), 1e-9);
}

TEST(Flatness, PureGaugeIsFlat)
{
    const auto f = spatial_rotor().structure_consts;
    std::mt19937_64 rng(3);
    for (int k = 0; k < 5; ++k) {
        EXPECT_LT(max_abs(check_flatness(so3_pure_gauge(), random_vector(rng, 2), f)), 1e-6);
    }
}

TEST(Flatness, NonAbelianCounterexampleIsDetected)
{
    const auto f = spatial_rotor().structure_consts;
    const auto r = check_flatness(so3_non_flat(), RVector::Zero(2), f);
    EXPECT_NEAR(r[2](0, 1), 1.0, 1e-12);
    EXPECT_NEAR(r[2](1, 0), -1.0, 1e-12);
    EXPECT_GT(max_abs(r), 1e-3);
}

TEST(Closure, Examples)
{
    auto one = planar_rotor();
    one.hamiltonians.resize(1);
    const RMatrix c1 = check_closure(one, RVector{{0.1, 0.2}}, RVector{{0.3, 0.4}});
    ASSERT_EQ(c1.rows(), 1);
    EXPECT_EQ(c1(0, 0), 0.0);

    std::mt19937_64 rng(4);
    for (const auto &sys : {planar_rotor(), spatial_rotor()}) {
        for (int k = 0; k < 10; ++k) {
            const RVector p = random_vector(rng, sys.m), q = random_vector(rng, sys.m);
            EXPECT_LT(check_closure(sys, p, q)(0, 1), 1e-10);
            // Bracket from finite-difference gradients.
            const auto &h1 = sys.hamiltonians[0];
            const auto &h2 = sys.hamiltonians[1];
            const double fd = canonical_bracket(fd_gradient([&](const RVector &x) { return h1.value(x, q); }, p),
                                                fd_gradient([&](const RVector &x) { return h1.value(p, x); }, q),
                                                fd_gradient([&](const RVector &x) { return h2.value(x, q); }, p),
                                                fd_gradient([&](const RVector &x) { return h2.value(p, x); }, q));
            EXPECT_LT(std::abs(fd), 1e-6);
        }
    }

    ToySystem canon;
    canon.m = 1;
    canon.hamiltonians = {{"p", [](const RVector &p, const RVector &) { return p(0); }, [](const RVector &, const RVector &) -> RVector { return RVector::Ones(1); },
                           [](const RVector &, const RVector &) -> RVector { return RVector::Zero(1); }},
                          {"q", [](const RVector &, const RVector &q) { return q(0); }, [](const RVector &, const RVector &) -> RVector { return RVector::Zero(1); },
                           [](const RVector &, const RVector &) -> RVector { return RVector::Ones(1); }}};
    EXPECT_EQ(bracket_matrix(canon, RVector::Zero(1), RVector::Zero(1))(0, 1), 1.0);
    EXPECT_EQ(check_closure(canon, RVector::Zero(1), RVector::Zero(1))(1, 0), 1.0);
}

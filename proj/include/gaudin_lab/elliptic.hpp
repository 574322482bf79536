#ifndef GAUDIN_LAB_ELLIPTIC_HPP
#define GAUDIN_LAB_ELLIPTIC_HPP

// Weierstrass wp, zeta and sigma for the lattice Z + tau Z (half-periods
// omega_1 = 1/2, omega_2 = tau/2), evaluated through the Jacobi theta_1 q-series:
//
//   sigma(z) = exp(eta_1 z^2) theta_1(pi z) / (pi theta_1'(0))
//   zeta(z)  = 2 eta_1 z + pi theta_1'(pi z) / theta_1(pi z)
//   wp(z)    = -2 eta_1 - pi^2 (theta_1 theta_1'' - theta_1'^2) / theta_1^2
//
// with eta_1 = -pi^2 theta_1'''(0) / (6 theta_1'(0)). Arguments are first
// reduced to the period parallelogram centred at 0 and the quasi-periodicity
// laws are applied to the result.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gaudin_lab/errors.hpp"
#include "gaudin_lab/lie_core.hpp"

namespace gaudin_lab
{

inline constexpr double pole_threshold = 1e-10;

class EllipticCache
{
public:
    explicit EllipticCache(cplx tau) : m_tau(tau)
    {
        if (!is_finite(tau) || !(tau.imag() > 0.0)) {
            fail(ErrorKind::invalid_argument, "lattice modulus needs Im(tau) > 0");
        }
        const cplx i_pi(0.0, pi);
        m_nome = std::exp(i_pi * tau);

        // Worst case in the reduced cell: |Im(pi z)| <= pi Im(tau) / 2, so a term
        // of the theta_1'' series is bounded by
        // exp(-pi Im tau ((n+1/2)^2 - (n+1/2))) (2n+1)^2 relative to |q|^{1/4}.
        const double it = tau.imag();
        int n = 0;
        for (;; ++n) {
            const double h = n + 0.5;
            const double log_bound = -pi * it * (h * h - h - 0.25) + 2.0 * std::log(2.0 * n + 1.0);
            if (log_bound < std::log(1e-18) && n >= 2) {
                break;
            }
            if (n > 10000) {
                fail(ErrorKind::invalid_argument, "theta series does not converge for this tau");
            }
        }
        m_truncation = n + 1;
        m_powers.resize(static_cast<std::size_t>(m_truncation));
        for (int k = 0; k < m_truncation; ++k) {
            const double h = k + 0.5;
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            m_powers[static_cast<std::size_t>(k)] = sign * std::exp(i_pi * tau * (h * h));
        }
        cplx d1 = 0.0, d3 = 0.0;
        for (int k = 0; k < m_truncation; ++k) {
            const double w = 2.0 * k + 1.0;
            d1 += m_powers[static_cast<std::size_t>(k)] * w;
            d3 -= m_powers[static_cast<std::size_t>(k)] * (w * w * w);
        }
        m_theta1_prime0 = 2.0 * d1;
        const cplx theta1_triple0 = 2.0 * d3;
        m_eta1 = -pi * pi * theta1_triple0 / (6.0 * m_theta1_prime0);
        // eta_2 = zeta(tau/2) straight from the series; the Legendre relation is
        // then a check rather than a definition.
        const auto t = theta(pi * tau / 2.0);
        m_eta2 = 2.0 * m_eta1 * (tau / 2.0) + pi * t[1] / t[0];
    }

    cplx tau() const noexcept
    {
        return m_tau;
    }
    cplx nome() const noexcept
    {
        return m_nome;
    }
    cplx eta1() const noexcept
    {
        return m_eta1;
    }
    cplx eta2() const noexcept
    {
        return m_eta2;
    }
    int truncation() const noexcept
    {
        return m_truncation;
    }

    // theta_1(v), theta_1'(v), theta_1''(v) with nome exp(i pi tau).
    std::array<cplx, 3> theta(cplx v) const
    {
        std::array<cplx, 3> out{0.0, 0.0, 0.0};
        for (int k = 0; k < m_truncation; ++k) {
            const double w = 2.0 * k + 1.0;
            const cplx c = m_powers[static_cast<std::size_t>(k)];
            const cplx s = std::sin(w * v);
            const cplx co = std::cos(w * v);
            out[0] += c * s;
            out[1] += c * w * co;
            out[2] -= c * w * w * s;
        }
        for (auto &o : out) {
            o *= 2.0;
        }
        return out;
    }

    cplx theta1_prime0() const noexcept
    {
        return m_theta1_prime0;
    }

    // z = reduced + a + b tau with `reduced` in the parallelogram centred at 0.
    struct Reduction {
        cplx reduced;
        double a;
        double b;
    };

    Reduction reduce(cplx z) const
    {
        const double b = std::round(z.imag() / m_tau.imag());
        const cplx shifted = z - b * m_tau;
        const double a = std::round(shifted.real());
        return {shifted - a, a, b};
    }

    // Distance from z to the nearest lattice point.
    double lattice_distance(cplx z) const
    {
        const auto r = reduce(z);
        double best = std::numeric_limits<double>::infinity();
        for (int i = -1; i <= 1; ++i) {
            for (int j = -1; j <= 1; ++j) {
                best = std::min(best, std::abs(r.reduced - (static_cast<double>(i) + static_cast<double>(j) * m_tau)));
            }
        }
        return best;
    }

private:
    cplx m_tau;
    cplx m_nome;
    cplx m_eta1;
    cplx m_eta2;
    cplx m_theta1_prime0;
    int m_truncation = 0;
    std::vector<cplx> m_powers;
};

inline EllipticCache build_cache(cplx tau)
{
    return EllipticCache(tau);
}

struct WeierstrassValues {
    std::optional<cplx> wp;
    std::optional<cplx> zeta;
    cplx sigma;
};

inline WeierstrassValues weierstrass_eval(const EllipticCache &cache, cplx z)
{
    if (!is_finite(z)) {
        fail(ErrorKind::non_finite, "Weierstrass argument");
    }
    const auto red = cache.reduce(z);
    const cplx z0 = red.reduced;
    const auto th = cache.theta(pi * z0);
    const cplx eta1 = cache.eta1();
    const cplx eta2 = cache.eta2();

    // sigma(z0 + w) = (-1)^{a+b+ab} sigma(z0) exp(eta(w) (z0 + w/2)) with
    // w = a + b tau and eta(w) = 2 a eta_1 + 2 b eta_2.
    const cplx w = red.a + red.b * cache.tau();
    const cplx eta_w = 2.0 * red.a * eta1 + 2.0 * red.b * eta2;
    const long long ia = static_cast<long long>(red.a);
    const long long ib = static_cast<long long>(red.b);
    const double parity = (((ia + ib + ia * ib) % 2) == 0) ? 1.0 : -1.0;
    const cplx sigma0 = std::exp(eta1 * z0 * z0) * th[0] / (pi * cache.theta1_prime0());

    WeierstrassValues out;
    out.sigma = parity * sigma0 * std::exp(eta_w * (z0 + w / 2.0));
    if (cache.lattice_distance(z) < pole_threshold) {
        return out;
    }
    out.zeta = 2.0 * eta1 * z0 + pi * th[1] / th[0] + eta_w;
    out.wp = -2.0 * eta1 - pi * pi * (th[2] * th[0] - th[1] * th[1]) / (th[0] * th[0]);
    return out;
}

inline cplx weierstrass_sigma(const EllipticCache &cache, cplx z)
{
    return weierstrass_eval(cache, z).sigma;
}

inline cplx weierstrass_zeta(const EllipticCache &cache, cplx z)
{
    const auto v = weierstrass_eval(cache, z);
    if (!v.zeta) {
        fail(ErrorKind::pole, "zeta evaluated at a lattice point");
    }
    return *v.zeta;
}

inline cplx weierstrass_p(const EllipticCache &cache, cplx z)
{
    const auto v = weierstrass_eval(cache, z);
    if (!v.wp) {
        fail(ErrorKind::pole, "wp evaluated at a lattice point");
    }
    return *v.wp;
}

// Residual of sigma(z + 2w_l) = -sigma(z) exp(2 eta_l (z + w_l)) and
// zeta(z + 2w_l) = zeta(z) + 2 eta_l.
inline double quasi_periodicity_check(const EllipticCache &cache, cplx z, int l)
{
    if (l != 1 && l != 2) {
        fail(ErrorKind::invalid_argument, "period index must be 1 or 2");
    }
    const cplx period = (l == 1) ? cplx(1.0) : cache.tau();
    const cplx eta = (l == 1) ? cache.eta1() : cache.eta2();
    if (cache.lattice_distance(z) < pole_threshold) {
        fail(ErrorKind::pole, "quasi-periodicity check at a lattice point");
    }
    const auto a = weierstrass_eval(cache, z);
    const auto b = weierstrass_eval(cache, z + period);
    const double sigma_res = std::abs(b.sigma + a.sigma * std::exp(2.0 * eta * (z + period / 2.0))) / std::abs(a.sigma);
    const double zeta_res = std::abs(*b.zeta - *a.zeta - 2.0 * eta);
    return std::max(sigma_res, zeta_res);
}

struct KernelValue {
    cplx value;
    cplx dlog_du;
    cplx dlog_dz;
};

// sigma(u + z - pole) / (sigma(u) sigma(z - pole)) * exp(-u zeta(z)), doubly
// periodic in z with a simple pole at z = pole of residue exp(-u zeta(pole)).
inline KernelValue kernel_phi(const EllipticCache &cache, cplx u, cplx z, cplx pole)
{
    if (cache.lattice_distance(u) < pole_threshold) {
        fail(ErrorKind::resonance, "kernel shift u is a lattice point");
    }
    if (cache.lattice_distance(z - pole) < pole_threshold) {
        fail(ErrorKind::pole, "kernel evaluated at its pole");
    }
    if (cache.lattice_distance(z) < pole_threshold) {
        fail(ErrorKind::pole, "kernel evaluated at the gluing point z = 0");
    }
    const auto s_sum = weierstrass_eval(cache, u + z - pole);
    const auto s_u = weierstrass_eval(cache, u);
    const auto s_zp = weierstrass_eval(cache, z - pole);
    const auto s_z = weierstrass_eval(cache, z);
    KernelValue out;
    out.value = s_sum.sigma / (s_u.sigma * s_zp.sigma) * std::exp(-u * *s_z.zeta);
    const cplx zeta_sum = s_sum.zeta ? *s_sum.zeta : std::numeric_limits<double>::quiet_NaN();
    out.dlog_du = zeta_sum - *s_u.zeta - *s_z.zeta;
    out.dlog_dz = zeta_sum - *s_zp.zeta + u * *s_z.wp;
    return out;
}

} // namespace gaudin_lab

#endif

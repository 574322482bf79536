#ifndef GAUDIN_LAB_VERIFY_ORACLES_HPP
#define GAUDIN_LAB_VERIFY_ORACLES_HPP

// Independent reference computations used by the test suites.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "gaudin_lab/lie_core.hpp"

namespace gaudin_lab::oracle
{

// Weierstrass functions from lattice sums taken row by row: each row
// {z + m tau + n : n in Z} is summed in closed form with trigonometric
// functions, leaving an exponentially convergent sum over m.
class LatticeWeierstrass
{
public:
    explicit LatticeWeierstrass(cplx tau, int rows = 0) : m_tau(tau)
    {
        m_rows = rows > 0 ? rows : static_cast<int>(std::ceil(40.0 / (2.0 * pi * tau.imag()))) + 4;
        cplx s = pi * pi / 6.0;
        for (int m = 1; m <= m_rows; ++m) {
            s += pi * pi * inv_sin2(static_cast<double>(m) * tau);
        }
        m_eta1 = s;
    }

    cplx eta1() const
    {
        return m_eta1;
    }

    cplx zeta(cplx z) const
    {
        cplx s = 2.0 * m_eta1 * z + pi * cot(z);
        for (int m = 1; m <= m_rows; ++m) {
            const cplx mt = static_cast<double>(m) * m_tau;
            s += pi * (cot(z + mt) + cot(z - mt));
        }
        return s;
    }

    cplx wp(cplx z) const
    {
        cplx s = -2.0 * m_eta1 + pi * pi * inv_sin2(z);
        for (int m = 1; m <= m_rows; ++m) {
            const cplx mt = static_cast<double>(m) * m_tau;
            s += pi * pi * (inv_sin2(z + mt) + inv_sin2(z - mt));
        }
        return s;
    }

    cplx sigma(cplx z) const
    {
        const cplx y = std::exp(cplx(0.0, 2.0 * pi) * z);
        cplx prod = 1.0;
        for (int m = 1; m <= m_rows; ++m) {
            const cplx x = std::exp(cplx(0.0, 2.0 * pi * m) * m_tau);
            prod *= (1.0 - x * y) * (1.0 - x / y) / ((1.0 - x) * (1.0 - x));
        }
        return std::exp(m_eta1 * z * z) * std::sin(pi * z) / pi * prod;
    }

private:
    // cot(pi w), evaluated in the exponential form that stays finite
    // for large |Im w|.
    static cplx cot(cplx w)
    {
        const cplx i(0.0, 1.0);
        if (w.imag() > 0.0) {
            const cplx e = std::exp(2.0 * pi * i * w);
            return i * (e + 1.0) / (e - 1.0);
        }
        const cplx e = std::exp(-2.0 * pi * i * w);
        return i * (1.0 + e) / (1.0 - e);
    }

    // 1/sin^2(pi w) in exponential form.
    static cplx inv_sin2(cplx w)
    {
        const cplx i(0.0, 1.0);
        const cplx e = (w.imag() > 0.0) ? std::exp(2.0 * pi * i * w) : std::exp(-2.0 * pi * i * w);
        return -4.0 * e / ((1.0 - e) * (1.0 - e));
    }

    cplx m_tau;
    int m_rows = 0;
    cplx m_eta1;
};

// exp(X) by Taylor summation after scaling by 2^s, then squaring.
inline CMatrix taylor_exponential(const CMatrix &x, int terms = 40)
{
    int s = 0;
    double nrm = x.norm();
    while (nrm > 0.5) {
        nrm /= 2.0;
        ++s;
    }
    const CMatrix y = x / std::pow(2.0, s);
    CMatrix term = CMatrix::Identity(x.rows(), x.cols());
    CMatrix sum = term;
    for (int k = 1; k < terms; ++k) {
        term = term * y / static_cast<double>(k);
        sum += term;
    }
    for (int k = 0; k < s; ++k) {
        sum = sum * sum;
    }
    return sum;
}

// Central difference of a complex function of a complex variable along
// direction dir.
inline cplx central_difference(const std::function<cplx(cplx)> &f, cplx z, double h, cplx dir = 1.0)
{
    return (f(z + h * dir) - f(z - h * dir)) / (2.0 * h * dir);
}

// Least-squares slope of log(err) against log(h).
inline double fitted_order(const std::vector<double> &h, const std::vector<double> &err)
{
    const std::size_t n = h.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double x = std::log(h[k]);
        const double y = std::log(err[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

} // namespace gaudin_lab::oracle

#endif

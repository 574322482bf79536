#ifndef GAUDIN_LAB_LIE_CORE_HPP
#define GAUDIN_LAB_LIE_CORE_HPP

// Dense complex matrix algebra over sl_m(C): Cartan-Weyl basis, trace pairing,
// component decomposition, the matrix exponential and the invariant
// polynomials P_k(X) = Tr(X^k)/k with their gradients.

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "gaudin_lab/errors.hpp"

namespace gaudin_lab
{

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived> &x)
{
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const auto v = x(i, j);
            if (!std::isfinite(std::real(v)) || !std::isfinite(std::imag(v))) {
                return false;
            }
        }
    }
    return true;
}

inline bool is_finite(cplx z)
{
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Element of sl_m(C) stored as a dense matrix. Tracelessness is checked at
// construction with tolerance 1e-12 * ||X||.
class AlgebraElement
{
public:
    AlgebraElement() = default;

    explicit AlgebraElement(CMatrix x) : m_matrix(std::move(x))
    {
        if (m_matrix.rows() != m_matrix.cols() || m_matrix.rows() < 1) {
            fail(ErrorKind::invalid_dimension, "algebra element must be a non-empty square matrix");
        }
        if (!all_finite(m_matrix)) {
            fail(ErrorKind::non_finite, "algebra element has non-finite entries");
        }
        const double tr = std::abs(m_matrix.trace());
        if (tr > 1e-12 * m_matrix.norm() && tr > 0.0) {
            fail(ErrorKind::not_traceless, "|Tr X| = " + std::to_string(tr));
        }
    }

    // Removes the trace part instead of rejecting it.
    static AlgebraElement project(CMatrix x)
    {
        const auto m = x.rows();
        const cplx shift = x.trace() / static_cast<double>(m);
        x.diagonal().array() -= shift;
        return AlgebraElement(std::move(x));
    }

    const CMatrix &matrix() const noexcept
    {
        return m_matrix;
    }
    int dim() const noexcept
    {
        return static_cast<int>(m_matrix.rows());
    }
    double norm() const
    {
        return m_matrix.norm();
    }

private:
    CMatrix m_matrix;
};

// Root eps_row - eps_col of sl_m; its generator is the elementary matrix E_{row,col}.
struct Root {
    int row = 0;
    int col = 0;
    // rho(H_mu) for every Cartan generator.
    RVector on_cartan;
};

// Cartan-Weyl data for sl_m with H_mu = E_{mu,mu} - E_{mu+1,mu+1}.
class LieBasis
{
public:
    explicit LieBasis(int m) : m_m(m)
    {
        if (m < 2) {
            fail(ErrorKind::invalid_dimension, "sl_m needs m >= 2, got " + std::to_string(m));
        }
        const int rk = m - 1;
        for (int mu = 0; mu < rk; ++mu) {
            CMatrix h = CMatrix::Zero(m, m);
            h(mu, mu) = 1.0;
            h(mu + 1, mu + 1) = -1.0;
            m_cartan.push_back(std::move(h));
        }
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                if (r == c) {
                    continue;
                }
                Root root{r, c, RVector(rk)};
                for (int mu = 0; mu < rk; ++mu) {
                    root.on_cartan(mu) = m_cartan[mu](r, r).real() - m_cartan[mu](c, c).real();
                }
                m_roots.push_back(std::move(root));
            }
        }
        m_gram = RMatrix(rk, rk);
        for (int a = 0; a < rk; ++a) {
            for (int b = 0; b < rk; ++b) {
                m_gram(a, b) = (m_cartan[a] * m_cartan[b]).trace().real();
            }
        }
        m_gram_ldlt.compute(m_gram);
    }

    int m() const noexcept
    {
        return m_m;
    }
    int rank() const noexcept
    {
        return m_m - 1;
    }
    const std::vector<CMatrix> &cartan() const noexcept
    {
        return m_cartan;
    }
    const std::vector<Root> &roots() const noexcept
    {
        return m_roots;
    }
    const RMatrix &gram() const noexcept
    {
        return m_gram;
    }

    CMatrix root_generator(std::size_t k) const
    {
        CMatrix e = CMatrix::Zero(m_m, m_m);
        e(m_roots.at(k).row, m_roots.at(k).col) = 1.0;
        return e;
    }

    // Coordinates c^mu with sum_nu Gram_{mu nu} c^nu = pairings_mu.
    CVector raise(const CVector &pairings) const
    {
        if (pairings.size() != rank()) {
            fail(ErrorKind::dimension_mismatch, "Cartan pairing vector has wrong length");
        }
        const RVector re = m_gram_ldlt.solve(pairings.real());
        const RVector im = m_gram_ldlt.solve(pairings.imag());
        CVector out(rank());
        for (int mu = 0; mu < rank(); ++mu) {
            out(mu) = cplx(re(mu), im(mu));
        }
        return out;
    }

    // Tr(X H_mu) for every mu; only the diagonal of X contributes.
    CVector cartan_pairings(const CMatrix &x) const
    {
        CVector out(rank());
        for (int mu = 0; mu < rank(); ++mu) {
            out(mu) = x(mu, mu) - x(mu + 1, mu + 1);
        }
        return out;
    }

    // sum_mu c^mu H_mu as a diagonal matrix.
    CMatrix cartan_element(const CVector &coords) const
    {
        if (coords.size() != rank()) {
            fail(ErrorKind::dimension_mismatch, "Cartan coordinate vector has wrong length");
        }
        CMatrix out = CMatrix::Zero(m_m, m_m);
        for (int mu = 0; mu < rank(); ++mu) {
            out(mu, mu) += coords(mu);
            out(mu + 1, mu + 1) -= coords(mu);
        }
        return out;
    }

    // rho_k(Q) for Q = sum_mu coords^mu H_mu.
    cplx root_value(std::size_t k, const CVector &coords) const
    {
        const auto &w = m_roots.at(k).on_cartan;
        cplx s = 0.0;
        for (int mu = 0; mu < rank(); ++mu) {
            s += w(mu) * coords(mu);
        }
        return s;
    }

private:
    int m_m;
    std::vector<CMatrix> m_cartan;
    std::vector<Root> m_roots;
    RMatrix m_gram;
    Eigen::LDLT<RMatrix> m_gram_ldlt;
};

inline LieBasis build_slm_basis(int m)
{
    return LieBasis(m);
}

inline cplx trace_pairing(const AlgebraElement &a, const AlgebraElement &b)
{
    if (a.dim() != b.dim()) {
        fail(ErrorKind::dimension_mismatch, "trace pairing of elements of different size");
    }
    return a.matrix().cwiseProduct(b.matrix().transpose()).sum();
}

struct CartanComponents {
    CVector cartan; // X^mu
    CVector roots;  // X^rho, ordered as LieBasis::roots()
};

inline CartanComponents cartan_decompose(const LieBasis &basis, const AlgebraElement &x)
{
    if (x.dim() != basis.m()) {
        fail(ErrorKind::dimension_mismatch, "element size does not match the basis");
    }
    const CMatrix &mat = x.matrix();
    CartanComponents out;
    out.cartan = basis.raise(basis.cartan_pairings(mat));
    out.roots.resize(static_cast<Eigen::Index>(basis.roots().size()));
    for (std::size_t k = 0; k < basis.roots().size(); ++k) {
        out.roots(static_cast<Eigen::Index>(k)) = mat(basis.roots()[k].row, basis.roots()[k].col);
    }
    return out;
}

inline AlgebraElement recompose(const LieBasis &basis, const CartanComponents &c)
{
    CMatrix out = basis.cartan_element(c.cartan);
    for (std::size_t k = 0; k < basis.roots().size(); ++k) {
        out(basis.roots()[k].row, basis.roots()[k].col) += c.roots(static_cast<Eigen::Index>(k));
    }
    return AlgebraElement(std::move(out));
}

// Scaling-and-squaring Pade approximant (Eigen's MatrixFunctions module).
inline CMatrix matrix_exponential(const CMatrix &x)
{
    if (x.rows() != x.cols()) {
        fail(ErrorKind::invalid_dimension, "matrix exponential of a non-square matrix");
    }
    if (!all_finite(x)) {
        fail(ErrorKind::non_finite, "matrix exponential argument");
    }
    return x.exp();
}

// P_k(X) = Tr(X^k)/k.
class InvariantPolynomial
{
public:
    explicit InvariantPolynomial(int degree) : m_degree(degree)
    {
        if (degree < 2) {
            fail(ErrorKind::invalid_argument, "invariant polynomial degree must be >= 2");
        }
    }

    int degree() const noexcept
    {
        return m_degree;
    }

    cplx evaluate(const CMatrix &x) const
    {
        return power(x, m_degree).trace() / static_cast<double>(m_degree);
    }

    // X^{k-1} with its trace removed, so the gradient lies in sl_m and
    // P(X + eps Y) = P(X) + eps Tr(Y grad) + O(eps^2) for traceless Y.
    CMatrix gradient(const CMatrix &x) const
    {
        CMatrix g = power(x, m_degree - 1);
        const cplx shift = g.trace() / static_cast<double>(x.rows());
        g.diagonal().array() -= shift;
        return g;
    }

private:
    static CMatrix power(const CMatrix &x, int k)
    {
        CMatrix out = x;
        for (int i = 1; i < k; ++i) {
            out = out * x;
        }
        return out;
    }

    int m_degree;
};

inline cplx invariant_poly_eval(const InvariantPolynomial &p, const AlgebraElement &x)
{
    return p.evaluate(x.matrix());
}

inline AlgebraElement invariant_poly_grad(const InvariantPolynomial &p, const AlgebraElement &x)
{
    return AlgebraElement::project(p.gradient(x.matrix()));
}

inline CMatrix commutator(const CMatrix &a, const CMatrix &b)
{
    return a * b - b * a;
}

// Coefficients c_1..c_m of det(lambda - X) = lambda^m + c_1 lambda^{m-1} + ... + c_m
// by the Faddeev-LeVerrier recursion.
inline CVector characteristic_coefficients(const CMatrix &x)
{
    const auto m = x.rows();
    CVector c(m);
    CMatrix mk = CMatrix::Zero(m, m);
    const CMatrix id = CMatrix::Identity(m, m);
    cplx prev = 1.0;
    for (Eigen::Index k = 1; k <= m; ++k) {
        mk = x * mk + prev * id;
        const cplx ck = -(x * mk).trace() / static_cast<double>(k);
        c(k - 1) = ck;
        prev = ck;
    }
    return c;
}

} // namespace gaudin_lab

#endif

#include "jointmeas/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace jmeas {

namespace {

Mat4 make_pauli_z(int qubit) {
    Mat4 m = Mat4::Zero();
    for (int x = 0; x < 4; ++x) m(x, x) = static_cast<double>(z_value(qubit, x));
    return m;
}

Mat4 make_lowering(int qubit) {
    // sigma_-|e> = |g>. Qubit 1 is the high bit of the index.
    const int bit = qubit == 1 ? 2 : 1;
    Mat4 m = Mat4::Zero();
    for (int x = 0; x < 4; ++x) {
        if (x & bit) m(x & ~bit, x) = 1.0;
    }
    return m;
}

PauliOps build_pauli_ops() {
    PauliOps ops;
    ops.sz1 = make_pauli_z(1);
    ops.sz2 = make_pauli_z(2);
    ops.sm1 = make_lowering(1);
    ops.sm2 = make_lowering(2);
    ops.sz1sz2 = ops.sz1 * ops.sz2;
    for (int x = 0; x < 4; ++x) {
        ops.proj[x] = Mat4::Zero();
        ops.proj[x](x, x) = 1.0;
    }
    return ops;
}

Mat4 sigma_y_sigma_y() {
    Eigen::Matrix2cd sy;
    sy << 0.0, -kI, kI, 0.0;
    return kron(sy, sy);
}

bool is_hermitian(const Mat4& c, double tol) {
    return (c - c.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, c.cwiseAbs().maxCoeff());
}

}  // namespace

const PauliOps& pauli_ops() {
    static const PauliOps ops = build_pauli_ops();
    return ops;
}

Mat4 kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Mat4 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

MatX dissipator(const MatX& c, const MatX& rho) {
    if (c.rows() != c.cols() || rho.rows() != rho.cols() || c.rows() != rho.rows()) {
        std::ostringstream msg;
        msg << "dissipator: dimension mismatch (c is " << c.rows() << "x" << c.cols() << ", rho is "
            << rho.rows() << "x" << rho.cols() << ")";
        throw ContractViolation(msg.str());
    }
    const MatX cdc = c.adjoint() * c;
    return c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
}

Mat4 dissipator(const Mat4& c, const Mat4& rho) {
    const Mat4 cdc = c.adjoint() * c;
    return c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
}

Mat4 meas_superop(const Mat4& c, const Mat4& rho) {
    if (!is_hermitian(c, 1e-12)) {
        throw ContractViolation("meas_superop: homodyne back-action operator must be Hermitian");
    }
    const cplx expect = (c * rho).trace();
    return 0.5 * (c * rho + rho * c) - expect * rho;
}

double min_eigenvalue(const Mat4& rho) {
    const Mat4 h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat4> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double purity(const Mat4& rho) { return (rho * rho).trace().real(); }

DensityCheck check_density(const Mat4& rho) {
    DensityCheck c;
    c.finite = rho.allFinite();
    if (!c.finite) return c;
    c.trace_error = std::abs(rho.trace() - 1.0);
    c.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    c.min_eigenvalue = min_eigenvalue(rho);
    return c;
}

Mat4 clamp_positive(const Mat4& rho, double tol) {
    const Mat4 h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat4> es(h);
    Eigen::Vector4d ev = es.eigenvalues();
    if (ev(0) < -tol) {
        std::ostringstream msg;
        msg << "density matrix has eigenvalue " << ev(0) << " below -" << tol;
        throw ContractViolation(msg.str());
    }
    ev = ev.cwiseMax(0.0);
    const double total = ev.sum();
    if (total <= 0.0) throw ContractViolation("density matrix has zero trace after clamping");
    ev /= total;
    return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

double concurrence(const Mat4& rho_in) {
    const Mat4 rho = clamp_positive(rho_in);
    static const Mat4 yy = sigma_y_sigma_y();
    const Mat4 tilde = yy * rho.conjugate() * yy;
    const Mat4 r = rho * tilde;
    Eigen::ComplexEigenSolver<Mat4> es(r, false);
    std::array<double, 4> lam{};
    for (int i = 0; i < 4; ++i) lam[i] = std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
    std::sort(lam.begin(), lam.end(), std::greater<>());
    return std::clamp(lam[0] - lam[1] - lam[2] - lam[3], 0.0, 1.0);
}

double concurrence_pure(const Vec4& psi) {
    static const Mat4 yy = sigma_y_sigma_y();
    return std::min(1.0, std::abs(psi.dot(yy * psi.conjugate())));
}

double fidelity(const Mat4& rho, const Vec4& psi) {
    if (std::abs(psi.norm() - 1.0) > 1e-9) {
        throw ContractViolation("fidelity: reference state is not normalized");
    }
    return psi.dot(rho * psi).real();
}

double trace_distance(const MatX& a, const MatX& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ContractViolation("trace_distance: dimension mismatch");
    }
    const MatX d = a - b;
    const MatX h = 0.5 * (d + d.adjoint());
    Eigen::SelfAdjointEigenSolver<MatX> es(h, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Mat4 correct_ee_gg_phase(const Mat4& rho, double theta) {
    Eigen::Matrix2cd r = Eigen::Matrix2cd::Identity();
    r(1, 1) = std::exp(kI * (0.5 * theta));
    const Mat4 u = kron(r, r);
    return u * rho * u.adjoint();
}

namespace states {

Vec4 basis(Logical x) {
    Vec4 v = Vec4::Zero();
    v(index_of(x)) = 1.0;
    return v;
}

Vec4 phi_plus() {
    return (basis(Logical::eg) + basis(Logical::ge)) / std::sqrt(2.0);
}

Vec4 psi_plus() {
    return (basis(Logical::gg) + basis(Logical::ee)) / std::sqrt(2.0);
}

Vec4 plus_plus() {
    Eigen::Vector2cd plus(1.0, 1.0);
    plus /= std::sqrt(2.0);
    return product(plus, plus);
}

Mat4 projector(const Vec4& psi) { return psi * psi.adjoint(); }

Vec4 product(const Eigen::Vector2cd& q1, const Eigen::Vector2cd& q2) {
    // Single-qubit vectors are ordered (|g>, |e>).
    Vec4 v;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) v(2 * a + b) = q1(a) * q2(b);
    return v;
}

}  // namespace states

}  // namespace jmeas

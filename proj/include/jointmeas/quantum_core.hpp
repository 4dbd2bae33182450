#pragma once

// Dense two-qubit operator algebra and entanglement/fidelity metrics.
//
// Basis ordering is fixed throughout the library: index 0 = |gg>, 1 = |ge>,
// 2 = |eg>, 3 = |ee>, where the first letter is qubit 1. sigma_z|e> = +|e>.

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace jmeas {

using cplx = std::complex<double>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Vec4 = Eigen::Matrix<cplx, 4, 1>;
using MatX = Eigen::MatrixXcd;

inline constexpr cplx kI{0.0, 1.0};

/// Logical two-qubit basis state. The enumerator value is the matrix index.
enum class Logical : int { gg = 0, ge = 1, eg = 2, ee = 3 };

inline constexpr std::array<Logical, 4> kLogicalStates{Logical::gg, Logical::ge, Logical::eg,
                                                       Logical::ee};
inline constexpr std::array<std::string_view, 4> kLogicalLabels{"gg", "ge", "eg", "ee"};

constexpr int index_of(Logical x) { return static_cast<int>(x); }

/// sigma_z eigenvalue of qubit `qubit` (1 or 2) in basis state x.
constexpr int z_value(int qubit, int x) {
    return qubit == 1 ? ((x & 2) ? +1 : -1) : ((x & 1) ? +1 : -1);
}

/// Thrown when a caller breaks a documented precondition (dimension mismatch,
/// non-Hermitian measurement operator, unnormalized state...).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct PauliOps {
    Mat4 sz1, sz2;
    Mat4 sm1, sm2;  // lowering operators
    Mat4 sz1sz2;    // parity
    std::array<Mat4, 4> proj;  // Pi_x = |x><x|, indexed by Logical
};

const PauliOps& pauli_ops();

/// D[c]rho = c rho c^dag - {c^dag c, rho}/2.
MatX dissipator(const MatX& c, const MatX& rho);
Mat4 dissipator(const Mat4& c, const Mat4& rho);

/// M[c]rho = {c, rho}/2 - Tr[c rho] rho. Rejects non-Hermitian c.
Mat4 meas_superop(const Mat4& c, const Mat4& rho);

/// Wootters concurrence. Eigenvalues of rho above -1e-6 are clamped to zero first.
double concurrence(const Mat4& rho);

/// |<psi| sigma_y (x) sigma_y |psi*>|, the pure-state concurrence.
double concurrence_pure(const Vec4& psi);

/// <psi|rho|psi>. Rejects psi whose norm differs from 1 by more than 1e-9.
double fidelity(const Mat4& rho, const Vec4& psi);

/// (1/2) sum |eigenvalues(a - b)| for Hermitian a, b of equal size.
double trace_distance(const MatX& a, const MatX& b);

double purity(const Mat4& rho);
double min_eigenvalue(const Mat4& rho);

struct DensityCheck {
    double trace_error = 0.0;        // |Tr rho - 1|
    double hermiticity_error = 0.0;  // max |rho - rho^dag|
    double min_eigenvalue = 0.0;
    bool finite = true;

    bool ok(double trace_tol = 1e-9, double herm_tol = 1e-12, double pos_tol = 1e-6) const {
        return finite && trace_error <= trace_tol && hermiticity_error <= herm_tol &&
               min_eigenvalue >= -pos_tol;
    }
};

DensityCheck check_density(const Mat4& rho);

/// Clamps eigenvalues in [-tol, 0) to zero and renormalizes; throws
/// ContractViolation if any eigenvalue is below -tol.
Mat4 clamp_positive(const Mat4& rho, double tol = 1e-6);

namespace states {
Vec4 basis(Logical x);
/// (|eg> + |ge>)/sqrt2, odd parity.
Vec4 phi_plus();
/// (|gg> + |ee>)/sqrt2, even parity.
Vec4 psi_plus();
/// ((|g> + |e>)/sqrt2) (x) ((|g> + |e>)/sqrt2).
Vec4 plus_plus();
Mat4 projector(const Vec4& psi);
Vec4 product(const Eigen::Vector2cd& q1, const Eigen::Vector2cd& q2);
}  // namespace states

/// Kronecker product of two single-qubit operators (qubit 1 first).
Mat4 kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b);

/// Relative |ee>-|gg> phase correction by the local unitary R(theta) (x) R(theta),
/// R = diag(1, e^{i theta/2}) on (|g>, |e>). Leaves the |eg>,|ge> block coherence untouched.
Mat4 correct_ee_gg_phase(const Mat4& rho, double theta);

}  // namespace jmeas

#include <gtest/gtest.h>

#include "jointmeas/quantum_core.hpp"
#include "test_util.hpp"

using namespace jmeas;
using jmeas::testing::max_abs;

namespace {

Vec4 ket(Logical x) { return states::basis(x); }

Mat4 outer(const Vec4& a, const Vec4& b) { return a * b.adjoint(); }

}  // namespace

TEST(PauliOps, ParityOfGroundStateIsEven) {
    const auto& p = pauli_ops();
    EXPECT_DOUBLE_EQ((ket(Logical::gg).adjoint() * p.sz1sz2 * ket(Logical::gg))(0).real(), 1.0);
    EXPECT_DOUBLE_EQ((ket(Logical::eg).adjoint() * p.sz1sz2 * ket(Logical::eg))(0).real(), -1.0);
}

TEST(PauliOps, LoweringActsOnFirstLetter) {
    const auto& p = pauli_ops();
    EXPECT_LT((p.sm1 * ket(Logical::eg) - ket(Logical::gg)).norm(), 1e-15);
    EXPECT_LT((p.sm1 * ket(Logical::ge)).norm(), 1e-15);
    EXPECT_LT((p.sm2 * ket(Logical::ge) - ket(Logical::gg)).norm(), 1e-15);
}

TEST(PauliOps, ProjectorsAreCompleteAndIdempotent) {
    const auto& p = pauli_ops();
    Mat4 sum = Mat4::Zero();
    for (const Mat4& pr : p.proj) {
        EXPECT_LT(max_abs(pr * pr - pr), 1e-15);
        sum += pr;
    }
    EXPECT_LT(max_abs(sum - Mat4::Identity()), 1e-15);
}

TEST(PauliOps, SigmaZHermitianTraceless) {
    const auto& p = pauli_ops();
    for (const Mat4* s : {&p.sz1, &p.sz2}) {
        EXPECT_LT(max_abs(*s - s->adjoint()), 1e-15);
        EXPECT_LT(std::abs(s->trace()), 1e-15);
    }
    EXPECT_DOUBLE_EQ((ket(Logical::ee).adjoint() * p.sz1 * ket(Logical::ee))(0).real(), 1.0);
}

TEST(Dissipator, RelaxationOfDoublyExcitedState) {
    const auto& p = pauli_ops();
    const Mat4 rho = outer(ket(Logical::ee), ket(Logical::ee));
    const Mat4 expected = outer(ket(Logical::ge), ket(Logical::ge)) - rho;
    EXPECT_LT(max_abs(dissipator(p.sm1, rho) - expected), 1e-15);
}

TEST(Dissipator, DephasingOfDiagonalStateVanishes) {
    std::mt19937_64 rng(1);
    Mat4 rho = jmeas::testing::random_density(rng).diagonal().asDiagonal();
    EXPECT_LT(max_abs(dissipator(pauli_ops().sz1, rho)), 1e-15);
}

TEST(Dissipator, CollectiveDecayAnnihilatesDarkState) {
    const auto& p = pauli_ops();
    const double lambda = 0.1;
    const Mat4 c = lambda * p.sm1 - lambda * p.sm2;
    EXPECT_LT((c * states::phi_plus()).norm(), 1e-15);
    EXPECT_LT(max_abs(dissipator(c, states::projector(states::phi_plus()))), 1e-15);
}

TEST(Dissipator, RejectsDimensionMismatch) {
    EXPECT_THROW(dissipator(MatX(MatX::Identity(2, 2)), MatX(MatX::Identity(4, 4))), ContractViolation);
}

TEST(Dissipator, TraceFreeForRandomInputs) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        const Mat4 c = jmeas::testing::random_matrix(rng);
        const Mat4 rho = jmeas::testing::random_hermitian(rng);
        EXPECT_LT(std::abs(dissipator(c, rho).trace()), 1e-12 * (1.0 + c.squaredNorm() * rho.norm()));
    }
}

TEST(MeasSuperop, EigenprojectorIsFixed) {
    const Mat4 rho = outer(ket(Logical::ge), ket(Logical::ge));
    EXPECT_LT(max_abs(meas_superop(pauli_ops().sz1sz2, rho)), 1e-15);
}

TEST(MeasSuperop, MaximallyMixedStateResponse) {
    const Mat4& c = pauli_ops().sz1sz2;
    EXPECT_LT(max_abs(meas_superop(c, Mat4::Identity() / 4.0) - c / 4.0), 1e-15);
}

TEST(MeasSuperop, ParitySuperpositionHasOnlyOffDiagonalResponse) {
    const Vec4 psi = (ket(Logical::gg) + ket(Logical::eg)) / std::sqrt(2.0);
    const Mat4 out = meas_superop(pauli_ops().sz1sz2, states::projector(psi));
    // {c, rho}/2 kills the gg-eg coherence between parity +1 and -1, Tr[c rho] = 0.
    Mat4 expected = Mat4::Zero();
    expected(0, 0) = 0.5;
    expected(2, 2) = -0.5;
    EXPECT_LT(max_abs(out - expected), 1e-15);
    EXPECT_LT(std::abs(out.trace()), 1e-15);
}

TEST(MeasSuperop, RejectsNonHermitianOperator) {
    EXPECT_THROW(meas_superop(pauli_ops().sm1, Mat4::Identity() / 4.0), ContractViolation);
}

TEST(MeasSuperop, TraceFreeForRandomInputs) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const Mat4 c = jmeas::testing::random_hermitian(rng);
        const Mat4 rho = jmeas::testing::random_density(rng);
        EXPECT_LT(std::abs(meas_superop(c, rho).trace()), 1e-12);
    }
}

TEST(Concurrence, BellStateIsMaximal) {
    EXPECT_NEAR(concurrence(states::projector(states::phi_plus())), 1.0, 1e-12);
    EXPECT_NEAR(concurrence(states::projector(states::psi_plus())), 1.0, 1e-12);
}

TEST(Concurrence, MaximallyMixedIsZero) { EXPECT_NEAR(concurrence(Mat4::Identity() / 4.0), 0.0, 1e-12); }

TEST(Concurrence, WernerState) {
    for (double p : {0.2, 0.6, 0.9}) {
        const Mat4 rho = p * states::projector(states::phi_plus()) + (1.0 - p) * Mat4::Identity() / 4.0;
        EXPECT_NEAR(concurrence(rho), std::max(0.0, (3.0 * p - 1.0) / 2.0), 1e-10) << p;
    }
}

TEST(Concurrence, PureStateMatchesAmplitudeFormula) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 100; ++i) {
        const Vec4 psi = jmeas::testing::random_pure(rng);
        const double direct = 2.0 * std::abs(psi(0) * psi(3) - psi(1) * psi(2));
        EXPECT_NEAR(concurrence_pure(psi), direct, 1e-12);
        EXPECT_NEAR(concurrence(states::projector(psi)), direct, 1e-6);
    }
}

TEST(Concurrence, ProductStateIsZero) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        Eigen::Vector2cd a = Eigen::Vector2cd::Random().normalized();
        Eigen::Vector2cd b = Eigen::Vector2cd::Random().normalized();
        EXPECT_NEAR(concurrence(states::projector(states::product(a, b))), 0.0, 1e-6);
    }
}

TEST(Concurrence, LocalUnitaryInvariance) {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 100; ++i) {
        const Mat4 rho = jmeas::testing::random_density(rng);
        const Mat4 u = kron(jmeas::testing::random_unitary2(rng), jmeas::testing::random_unitary2(rng));
        EXPECT_NEAR(concurrence(u * rho * u.adjoint()), concurrence(rho), 1e-9);
    }
}

TEST(Fidelity, Examples) {
    const Mat4 psi = states::projector(states::psi_plus());
    EXPECT_NEAR(fidelity(psi, states::psi_plus()), 1.0, 1e-12);
    EXPECT_NEAR(fidelity(states::projector(states::phi_plus()), states::psi_plus()), 0.0, 1e-12);
    EXPECT_NEAR(fidelity(Mat4::Identity() / 4.0, states::phi_plus()), 0.25, 1e-12);
}

TEST(Fidelity, RejectsUnnormalizedState) {
    EXPECT_THROW(fidelity(Mat4::Identity() / 4.0, 2.0 * states::phi_plus()), ContractViolation);
}

TEST(Fidelity, LinearAndBounded) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const Mat4 a = jmeas::testing::random_density(rng);
        const Mat4 b = jmeas::testing::random_density(rng);
        const Vec4 psi = jmeas::testing::random_pure(rng);
        const double w = 0.3;
        EXPECT_NEAR(fidelity(w * a + (1 - w) * b, psi), w * fidelity(a, psi) + (1 - w) * fidelity(b, psi), 1e-12);
        EXPECT_GE(fidelity(a, psi), 0.0);
        EXPECT_LE(fidelity(a, psi), 1.0);
    }
}

TEST(DensityChecks, ValidAndInvalidStates) {
    EXPECT_TRUE(check_density(Mat4::Identity() / 4.0).ok());
    Mat4 bad = Mat4::Identity() / 4.0;
    bad(0, 0) = -0.1;
    bad(1, 1) = 0.6;
    EXPECT_FALSE(check_density(bad).ok());
    Mat4 skew = Mat4::Identity() / 4.0;
    skew(0, 1) = 0.1;
    EXPECT_FALSE(check_density(skew).ok());
}

TEST(DensityChecks, ClampRemovesTinyNegativeEigenvalues) {
    Mat4 rho = Mat4::Zero();
    rho(0, 0) = 1.0 + 5e-7;
    rho(1, 1) = -5e-7;
    const Mat4 fixed = clamp_positive(rho);
    EXPECT_GE(min_eigenvalue(fixed), -1e-15);
    EXPECT_NEAR(fixed.trace().real(), 1.0, 1e-15);
    rho(1, 1) = -1e-3;
    EXPECT_THROW(clamp_positive(rho), ContractViolation);
}

TEST(TraceDistance, OrthogonalStatesAreDistanceOne) {
    EXPECT_NEAR(trace_distance(states::projector(states::phi_plus()), states::projector(states::psi_plus())), 1.0,
                1e-12);
}

TEST(PhaseCorrection, RemovesRelativeEeGgPhase) {
    const double theta = 0.7;
    Vec4 rotated = states::psi_plus();
    rotated(3) *= std::exp(-kI * theta);
    const Mat4 fixed = correct_ee_gg_phase(states::projector(rotated), theta);
    EXPECT_NEAR(fidelity(fixed, states::psi_plus()), 1.0, 1e-12);
    const Mat4 odd = states::projector(states::phi_plus());
    EXPECT_LT(max_abs(correct_ee_gg_phase(odd, theta) - odd), 1e-15);
}

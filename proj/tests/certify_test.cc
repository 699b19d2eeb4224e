#include "reluiqc/certify.h"

#include <map>
#include <random>

#include <gtest/gtest.h>

#include "test_util.h"

namespace reluiqc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

RnnModel Scalar(double lambda, double win, double wout) {
  return RnnModel(MatrixXd::Constant(1, 1, lambda), MatrixXd::Constant(1, 1, win),
                  MatrixXd::Constant(1, 1, wout));
}

Certificate HandCertificate() {
  Certificate c;
  c.p = MatrixXd::Constant(1, 1, 1.0);
  c.s = MatrixXd::Constant(1, 1, 1.5);
  c.pi = MatrixXd::Zero(2, 2);
  c.eps = 1e-6;
  c.s_min = 1e-6;
  return c;
}

TEST(TestIdTest, NamesAndAliases) {
  for (TestId t : kAllTests) EXPECT_EQ(ParseTestId(to_string(t)), t);
  EXPECT_EQ(ParseTestId("I"), TestId::kSSG);
  EXPECT_EQ(ParseTestId("II"), TestId::kL2pSSG);
  EXPECT_EQ(ParseTestId("III"), TestId::kSsgZfPol);
  EXPECT_EQ(ParseTestId("IV"), TestId::kSsgZfPolCop);
  EXPECT_FALSE(ParseTestId("V").has_value());
  EXPECT_TRUE(FreezesScaling(TestId::kSG));
  EXPECT_FALSE(FreezesScaling(TestId::kSSG));
}

// Lambda = 0, Win = 1, Wout = 0.5: lmi = diag(-P + S/4, P - S).
TEST(AssembleTest, HandTwoByTwo) {
  const FeasibilityProblem prob = Assemble(Scalar(0.0, 1.0, 0.5), ZeroFamily(1), 1e-6, 1e-6);
  ASSERT_EQ(prob.variables.blocks().size(), 2u);
  EXPECT_EQ(prob.variables.blocks()[0].name, "P");
  EXPECT_EQ(prob.variables.blocks()[1].name, "S");
  VectorXd x = VectorXd::Zero(prob.variables.num_scalars());
  prob.variables.Find("P").Assign(MatrixXd::Constant(1, 1, 1.0), &x);
  prob.variables.Find("S").Assign(MatrixXd::Constant(1, 1, 1.5), &x);
  MatrixXd expected(2, 2);
  expected << -0.625, 0, 0, -0.5;
  EXPECT_LE((prob.lmi.Evaluate(x) - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(StabilityLmi(Scalar(0.0, 1.0, 0.5), HandCertificate().p, HandCertificate().s, MatrixXd::Zero(2, 2)),
            expected);
}

TEST(AssembleTest, RejectsBadArguments) {
  EXPECT_THROW(Assemble(Scalar(0.0, 1.0, 0.5), ZeroFamily(2), 1e-6, 1e-6), std::invalid_argument);
  EXPECT_THROW(Assemble(Scalar(0.0, 1.0, 0.5), ZeroFamily(1), 0.0, 1e-6), std::invalid_argument);
  EXPECT_THROW(Assemble(Scalar(0.0, 1.0, 0.5), ZeroFamily(1), 1e-6, -1.0), std::invalid_argument);
}

// Independent evaluation of the stability LMI for random assignments.
TEST(AssembleTest, MatchesDirectFormulaAndIsSymmetric) {
  std::mt19937_64 rng(1);
  for (TestId test : kAllTests) {
    const RnnModel model = testing::RandomStableModel(3, 2, &rng);
    const MultiplierFamily fam = FamilyFor(test, 2);
    const FeasibilityProblem prob = Assemble(model, fam, 1e-6, 1e-6, FreezesScaling(test));
    const VectorXd x = testing::RandomMatrix(prob.variables.num_scalars(), 1, &rng);
    const MatrixXd lmi = prob.lmi.Evaluate(x);
    EXPECT_LE((lmi - lmi.transpose()).cwiseAbs().maxCoeff(), 1e-12);

    const MatrixXd p = prob.variables.Find("P").Value(x);
    const MatrixXd s = FreezesScaling(test) ? MatrixXd::Identity(2, 2) : prob.variables.Find("S").Value(x);
    const MatrixXd pi = fam.Pi(x.segment(prob.family_offset, fam.num_scalars()));
    MatrixXd a(5, 5), b = MatrixXd::Zero(4, 5), st = MatrixXd::Zero(5, 5);
    a << model.lambda(), model.win(), model.wout(), MatrixXd::Zero(2, 2);
    b.topLeftCorner(2, 3) = model.wout();
    b.bottomRightCorner(2, 2) = MatrixXd::Identity(2, 2);
    st.topLeftCorner(3, 3) = p;
    st.bottomRightCorner(2, 2) = s;
    const MatrixXd direct = -st + a.transpose() * st * a + b.transpose() * pi * b;
    EXPECT_LE((lmi - direct).cwiseAbs().maxCoeff(), 1e-12) << to_string(test);
  }
}

TEST(SolveTest, HandCaseIsFeasible) {
  const RnnModel model = Scalar(0.0, 1.0, 0.5);
  const FeasibilityProblem prob = Assemble(model, ZeroFamily(1), 1e-6, 1e-6);
  const SolveOutcome out = Solve(prob);
  ASSERT_EQ(out.kind, OutcomeKind::kFeasible) << out.detail;
  ASSERT_TRUE(out.certificate);
  EXPECT_TRUE(VerifyCertificate(model, ZeroFamily(1), *out.certificate).verified);
  EXPECT_GE(out.certificate->margin, 1e-6);
}

TEST(SolveTest, GainTwoSmallGainIsInfeasible) {
  const RnnModel model = Scalar(0.0, 2.0, 1.0);
  const SolveOutcome out = Solve(Assemble(model, ZeroFamily(1), 1e-6, 1e-6, true));
  EXPECT_EQ(out.kind, OutcomeKind::kInfeasible) << out.detail;
  EXPECT_FALSE(out.certificate.has_value());
  EXPECT_EQ(RunTest(model, TestId::kSG).outcome, OutcomeKind::kInfeasible);
}

TEST(SolveTest, ConstantProblemWithoutVariables) {
  FeasibilityProblem prob;
  prob.eps = 1e-6;
  prob.s_min = 1e-6;
  prob.s_frozen = true;
  prob.lmi = AffineMatrix(-MatrixXd::Identity(2, 2));
  const SolveOutcome out = Solve(prob);
  ASSERT_EQ(out.kind, OutcomeKind::kFeasible) << out.detail;
  EXPECT_EQ(out.certificate->multiplier.size(), 0u);
  EXPECT_NEAR(out.certificate->margin, 1.0, 1e-12);
}

TEST(SolveTest, IterationLimitIsSolverFailure) {
  CertifyOptions opts;
  opts.solver.backend.max_iterations = 2;
  const TestResult res = RunTest(RnnModel::Example(0.0, 0.0), TestId::kSSG, opts);
  EXPECT_EQ(res.outcome, OutcomeKind::kSolverFailure);
  EXPECT_NE(res.detail.find("max_iterations"), std::string::npos) << res.detail;
}

TEST(VerifyTest, HandCertificate) {
  const RnnModel model = Scalar(0.0, 1.0, 0.5);
  Certificate c = HandCertificate();
  const VerificationReport ok = VerifyCertificate(model, ZeroFamily(1), c);
  EXPECT_TRUE(ok.verified) << ok.reason;
  EXPECT_NEAR(ok.lmi_max_eig, -0.5, 1e-15);
  c.p(0, 0) = -0.1;
  const VerificationReport bad = VerifyCertificate(model, ZeroFamily(1), c);
  EXPECT_FALSE(bad.verified);
  EXPECT_NEAR(bad.worst_constraint_violation, 0.1, 1e-15);
}

TEST(VerifyTest, DhdViolationIsReported) {
  const RnnModel model(MatrixXd::Zero(2, 2), 0.1 * MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2));
  const MultiplierFamily fam = ZamesFalbFamily(2);
  Certificate c;
  c.p = MatrixXd::Identity(2, 2);
  c.s = MatrixXd::Identity(2, 2);
  MatrixXd bad(2, 2);
  bad << 1, -2, 0, 1;
  c.multiplier = {{"M", bad}};
  VectorXd x = VectorXd::Zero(fam.num_scalars());
  fam.variables.Find("M").Assign(bad, &x);
  c.pi = fam.Pi(x);
  c.eps = 1e-6;
  c.s_min = 1e-6;
  const VerificationReport r = VerifyCertificate(model, fam, c);
  EXPECT_FALSE(r.verified);
  EXPECT_NEAR(r.worst_constraint_violation, 1.0, 1e-12);
}

TEST(VerifyTest, FrozenScalingMustBeIdentity) {
  const RnnModel model = Scalar(0.0, 0.5, 1.0);
  Certificate c;
  c.p = MatrixXd::Constant(1, 1, 2.0);
  c.s = MatrixXd::Constant(1, 1, 1.2);
  c.pi = MatrixXd::Zero(2, 2);
  c.eps = 1e-6;
  c.s_min = 1e-6;
  c.s_frozen = true;
  EXPECT_FALSE(VerifyCertificate(model, ZeroFamily(1), c).verified);
  c.s(0, 0) = 1.0;
  EXPECT_TRUE(VerifyCertificate(model, ZeroFamily(1), c).verified);
}

TEST(RunTestTest, ExampleAtOriginPassesSmallGain) {
  const TestResult res = RunTest(RnnModel::Example(0.0, 0.0), TestId::kSG);
  EXPECT_EQ(res.outcome, OutcomeKind::kFeasible) << res.detail;
  EXPECT_TRUE(res.verified);
  ASSERT_TRUE(res.certificate);
  EXPECT_EQ(res.certificate->s, MatrixXd::Identity(6, 6));
}

TEST(RunTestTest, PointOnePointFour) {
  const RnnModel model = RnnModel::Example(1.0, 1.4);
  const TestResult two = RunTest(model, TestId::kL2pSSG);
  EXPECT_EQ(two.outcome, OutcomeKind::kFeasible) << two.detail;
  EXPECT_TRUE(two.verified);
  EXPECT_EQ(RunTest(model, TestId::kSsgZfPol).outcome, OutcomeKind::kInfeasible);
}

TEST(RunTestTest, MonotoneAlongALine) {
  for (double b : {-6.0, -2.0, 0.0, 3.0, 7.0}) {
    const RnnModel model = RnnModel::Example(0.6, b);
    std::map<TestId, OutcomeKind> o;
    for (TestId t : {TestId::kSSG, TestId::kL2pSSG, TestId::kSsgZfPol, TestId::kSsgZfPolCop}) {
      o[t] = RunTest(model, t).outcome;
    }
    const auto implies = [&](TestId weak, TestId strong) {
      return o[weak] != OutcomeKind::kFeasible || o[strong] != OutcomeKind::kInfeasible;
    };
    EXPECT_TRUE(implies(TestId::kSSG, TestId::kL2pSSG)) << b;
    EXPECT_TRUE(implies(TestId::kSSG, TestId::kSsgZfPol)) << b;
    EXPECT_TRUE(implies(TestId::kSsgZfPol, TestId::kSsgZfPolCop)) << b;
  }
}

TEST(ScaledModelTest, TestOneImpliesScaledSmallGain) {
  const RnnModel model = RnnModel::Example(0.0, 0.0);
  const TestResult res = RunTest(model, TestId::kSSG);
  ASSERT_EQ(res.outcome, OutcomeKind::kFeasible) << res.detail;
  EXPECT_LT(HinfNorm(ScaledModel(model, res.certificate->s)), 1.0);
  EXPECT_THROW(ScaledModel(model, MatrixXd::Zero(6, 6)), std::invalid_argument);
}

TEST(GainBoundTest, DecoupledModelFloor) {
  const RnnModel model(MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2));
  Certificate c;
  c.p = MatrixXd::Identity(2, 2);
  c.s = MatrixXd::Identity(2, 2);
  c.pi = MatrixXd::Zero(4, 4);
  c.eps = 1e-6;
  const double g = CertificateGainBound(c, model);
  EXPECT_TRUE(std::isfinite(g));
  EXPECT_GE(g, 1.0);
}

TEST(GainBoundTest, HandCaseBoundsSimulation) {
  const RnnModel model = Scalar(0.0, 1.0, 0.5);
  Certificate c = HandCertificate();
  const double g = CertificateGainBound(c, model);
  EXPECT_TRUE(std::isfinite(g));
  EXPECT_LE(EmpiricalGainLowerBound(model, 100, 100, 3), g + 1e-6);
  // Scaling the certificate keeps it valid and the bound finite.
  c.p *= 2.0;
  c.s *= 2.0;
  EXPECT_TRUE(VerifyCertificate(model, ZeroFamily(1), c).verified);
  const double g2 = CertificateGainBound(c, model);
  EXPECT_TRUE(std::isfinite(g2));
  EXPECT_LE(EmpiricalGainLowerBound(model, 100, 100, 4), g2 + 1e-6);
}

TEST(GainBoundTest, RejectsIndefiniteCertificate) {
  Certificate c = HandCertificate();
  c.s(0, 0) = 10.0;  // -P + S/4 > 0
  EXPECT_THROW(CertificateGainBound(c, Scalar(0.0, 1.0, 0.5)), std::invalid_argument);
}

}  // namespace
}  // namespace reluiqc

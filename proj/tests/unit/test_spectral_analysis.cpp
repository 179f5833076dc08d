#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "lmaxlab/lanczos.hpp"
#include "lmaxlab/sampling.hpp"
#include "lmaxlab/spectral_analysis.hpp"
#include "oracles.hpp"

using namespace lmaxlab;

namespace {

RealMatrix random_symmetric(Index n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  RealMatrix a(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) a(i, j) = g(gen);
  return (a + a.transpose()) / 2.0;
}

}  // namespace

TEST(DiscreteMeasure, Validation) {
  EXPECT_THROW(DiscreteMeasure({{1.0, 0.5}}), DomainError);
  EXPECT_THROW(DiscreteMeasure({{1.0, 1.5}, {2.0, -0.5}}), DomainError);
  EXPECT_THROW(DiscreteMeasure({{std::nan(""), 1.0}}), DomainError);
  EXPECT_NEAR(DiscreteMeasure::uniform({1, 2, 3}).total_mass(), 1.0, 1e-15);
}

TEST(Esd, AtomsAndMerging) {
  const auto m = esd(decompose(build_population(SpikedModel{{5.0}, 1.0, 3})));
  ASSERT_EQ(m.size(), 3u);
  EXPECT_NEAR(m.atoms()[0].weight, 1.0 / 3.0, 1e-15);
  const auto merged = m.merged();
  ASSERT_EQ(merged.size(), 2u);
  EXPECT_DOUBLE_EQ(merged.atoms()[0].location, 1.0);
  EXPECT_NEAR(merged.atoms()[0].weight, 2.0 / 3.0, 1e-15);

  const auto id = esd(decompose(HermitianMatrix(RealMatrix(RealMatrix::Identity(6, 6))))).merged();
  ASSERT_EQ(id.size(), 1u);
  EXPECT_NEAR(id.atoms()[0].weight, 1.0, 1e-15);
}

TEST(Esd, MergingPreservesLowMoments) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> locs;
  for (int i = 0; i < 200; ++i) {
    const double base = std::floor(10.0 * u(gen));
    locs.push_back(base * (1.0 + 1e-12 * u(gen)));
  }
  const auto m = DiscreteMeasure::uniform(locs);
  const auto mm = m.merged();
  EXPECT_LT(mm.size(), m.size());
  for (int p = 1; p <= 4; ++p) {
    auto f = [p](double x) { return std::pow(x, p); };
    EXPECT_NEAR(m.integrate(f), mm.integrate(f), 1e-8);
  }
}

TEST(Esd, NormalizedToeplitzConcentratesAtZero) {
  double prev = 0.0;
  for (Index N : {250, 500, 1000}) {
    const auto dec = decompose(build_population(ToeplitzModel{{}, N}));
    const double l1 = dec.eigenvalues(0);
    const double mass = esd(dec).integrate([l1](double x) { return x / l1 < 0.05 ? 1.0 : 0.0; });
    EXPECT_GT(mass, prev);
    prev = mass;
  }
  EXPECT_GT(prev, 0.8);
}

TEST(CompanionEsd, Mixture) {
  const auto c = companion_esd(DiscreteMeasure::dirac(4.0), 0.5);
  const auto m = c.merged();
  ASSERT_EQ(m.size(), 2u);
  EXPECT_DOUBLE_EQ(m.atoms()[0].location, 0.0);
  EXPECT_NEAR(m.atoms()[0].weight, 0.5, 1e-15);
  EXPECT_NEAR(m.atoms()[1].weight, 0.5, 1e-15);
  const auto same = companion_esd(DiscreteMeasure::uniform({1, 2}), 1.0).merged();
  ASSERT_EQ(same.size(), 2u);
  EXPECT_NEAR(same.atoms()[0].weight, 0.5, 1e-15);
  EXPECT_THROW(companion_esd(DiscreteMeasure::uniform({1, 2}), 2.0), DomainError);
}

TEST(CompanionEsd, MatchesBruteForceEightByFive) {
  const auto dec = decompose(build_population(ToeplitzModel{{}, 8}));
  const DenseMatrix z = draw_entries(EntryLaw::real_gaussian, {8, 5, 12, 0});
  const auto s = decompose(sample_covariance(dec.sqrt(), z));
  const auto predicted = companion_esd(esd(s), 8.0 / 5.0).merged(1e-9);
  const auto brute = oracle::dense_eigs(companion(dec.reconstruct(), z).as_complex());
  const auto actual = DiscreteMeasure::uniform(brute).merged(1e-9);
  ASSERT_EQ(predicted.size(), actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) {
    EXPECT_NEAR(predicted.atoms()[i].location, actual.atoms()[i].location, 1e-9);
    EXPECT_NEAR(predicted.atoms()[i].weight, actual.atoms()[i].weight, 1e-12);
  }
}

TEST(DiscreteMeasure, CsvColumns) {
  std::ostringstream os;
  DiscreteMeasure::uniform({1.0, 3.0}).write_csv(os);
  EXPECT_EQ(os.str().substr(0, 16), "location,weight\n");
}

TEST(TopTwo, SmallCases) {
  const auto d = top_two(decompose(build_population(SpikedModel{{5.0}, 1.0, 3})));
  EXPECT_EQ(d.first, 5.0);
  EXPECT_EQ(d.second, 1.0);
  RealMatrix a(2, 2);
  a << 2, 1, 1, 2;
  const auto t = top_two(HermitianMatrix(a));
  EXPECT_NEAR(t.first, 3.0, 1e-14);
  EXPECT_NEAR(t.second, 1.0, 1e-14);
  EXPECT_THROW(top_two(HermitianMatrix(RealMatrix(RealMatrix::Ones(1, 1)))), DomainError);
}

TEST(TopTwo, IterativeAgreesWithFull) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> dim(2, 300);
  for (int trial = 0; trial < 100; ++trial) {
    const RealMatrix a = random_symmetric(dim(gen), gen);
    const HermitianMatrix h(a);
    const auto full = top_two(h, EigenPath::full);
    const auto it = top_two(h, EigenPath::iterative);
    const double scale = std::max(std::abs(full.first), std::abs(full.second));
    EXPECT_NEAR(it.first, full.first, 1e-8 * scale) << trial;
    EXPECT_NEAR(it.second, full.second, 1e-8 * scale) << trial;
  }
}

TEST(TopTwo, WhiteNoiseEdgeBand) {
  const auto root = PopulationRoot::diagonal(RealVector::Ones(500));
  for (std::uint64_t s = 0; s < 5; ++s) {
    const double l = largest_eigenvalue(sample_covariance(root, draw_entries(EntryLaw::real_gaussian, {500, 500, 100 + s, 0})));
    EXPECT_GT(l, 3.6);
    EXPECT_LT(l, 4.4);
  }
}

TEST(Lanczos, RepeatedEigenvaluesAndComplex) {
  RealVector d(60);
  for (Index i = 0; i < 60; ++i) d(i) = i < 3 ? 10.0 : 1.0 / (1.0 + i);
  const RealMatrix q = Eigen::HouseholderQR<RealMatrix>(RealMatrix::Random(60, 60)).householderQ();
  const RealMatrix a = q * d.asDiagonal() * q.transpose();
  const LinearOperator<double> op = [&a](const RealVector& x, RealVector& y) { y.noalias() = a * x; };
  const auto r = lanczos_top<double>(op, 60, 4);
  EXPECT_NEAR(r.values[0], 10.0, 1e-10);
  EXPECT_NEAR(r.values[1], 10.0, 1e-10);
  EXPECT_NEAR(r.values[2], 10.0, 1e-10);
  EXPECT_NEAR(r.values[3], 0.25, 1e-10);

  ComplexMatrix h = ComplexMatrix::Random(70, 70);
  h = (h + h.adjoint()).eval();
  const LinearOperator<Complex> cop = [&h](const ComplexVector& x, ComplexVector& y) { y.noalias() = h * x; };
  const auto cr = lanczos_top<Complex>(cop, 70, 2);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> s(h);
  EXPECT_NEAR(cr.values[0], s.eigenvalues()(69), 1e-9);
  EXPECT_NEAR(cr.values[1], s.eigenvalues()(68), 1e-9);
  const ComplexVector v = cr.vectors.col(0);
  EXPECT_LT((h * v - cr.values[0] * v).norm(), 1e-8);
}

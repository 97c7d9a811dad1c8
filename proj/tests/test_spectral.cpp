/*
 * Copyright (c) 2026, The htrm Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <limits>

#include <doctest.h>
#include <Eigen/Dense>

#include "htrm/ensembles.hpp"
#include "htrm/error.hpp"
#include "htrm/spectral.hpp"
#include "htrm/tail_laws.hpp"

using namespace htrm;

namespace {

Eigen::MatrixXd random_symmetric(Eigen::Index n, Rng& rng) {
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) m(i, j) = m(j, i) = rng.normal() / std::sqrt(double(n));
  }
  return m;
}

Eigen::VectorXd descending_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
  return ev.reverse();
}

}  // namespace

TEST_CASE("2x2 off-diagonal matrix has eigenvalues +-theta") {
  EnsembleSample s;
  s.kind = EnsembleKind::dense_wigner;
  s.rows = s.cols = 2;
  s.entries = {{0, 1, 1.5}};
  EigenOptions o;
  o.k = 2;
  const SpectralResult r = top_k_eigs(s, o);
  CHECK(r.converged);
  CHECK(r.eigenvalues[0] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(r.eigenvalues[1] == doctest::Approx(-1.5).epsilon(1e-14));
}

TEST_CASE("Lanczos top-5 matches the dense solver on random 200x200 matrices") {
  Rng rng(41);
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd m = random_symmetric(200, rng);
    EigenOptions o;
    o.k = 5;
    o.vectors = true;
    const SpectralResult r = lanczos_top_k(DenseOperator(m), o);
    REQUIRE(r.converged);
    const Eigen::VectorXd ref = descending_eigenvalues(m);
    for (int i = 0; i < 5; ++i) {
      CHECK(std::abs(r.eigenvalues[i] - ref(i)) < 1e-8);
      CHECK(r.eigenvectors[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(r.residuals[i] <= 1e-8);
      for (int j = 0; j < i; ++j) CHECK(std::abs(r.eigenvectors[i].dot(r.eigenvectors[j])) < 1e-8);
    }
    CHECK(std::is_sorted(r.eigenvalues.rbegin(), r.eigenvalues.rend()));
  }
}

TEST_CASE("repeated top eigenvalues are recovered") {
  // diag(3, 3, 3, 1, 0, ...) in a random orthonormal basis.
  Rng rng(42);
  const Eigen::Index n = 60;
  const Eigen::MatrixXd g = random_symmetric(n, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  d.head(4) << 3, 3, 3, 1;
  const Eigen::MatrixXd m = q * d.asDiagonal() * q.transpose();
  EigenOptions o;
  o.k = 4;
  const SpectralResult r = lanczos_top_k(DenseOperator(m), o);
  CHECK(r.converged);
  for (int i = 0; i < 3; ++i) CHECK(r.eigenvalues[i] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(r.eigenvalues[3] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.near_degenerate);
}

TEST_CASE("sparse and dense operators agree") {
  const TailLaw law = build_crossover_law(2.0, 4.0, 3.0);
  Rng rng(43);
  const EnsembleSample s = sample_sparse_wigner(300, 30.0, law, rng);
  const Eigen::MatrixXd m = to_dense(s);
  const SparseOperator sp(s);
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(300, -1.0, 2.0);
  Eigen::VectorXd y(300);
  sp.apply(x, y);
  CHECK((y - m * x).cwiseAbs().maxCoeff() < 1e-12);
  EigenOptions o;
  o.k = 3;
  const SpectralResult r = lanczos_top_k(sp, o);
  const Eigen::VectorXd ref = descending_eigenvalues(m);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(r.eigenvalues[i] - ref(i)) < 1e-8);
}

TEST_CASE("symmetrized covariance spectrum is symmetric about zero") {
  Rng rng(44);
  const EnsembleSample e = symmetrize_covariance(sample_covariance_factor(30, 50, GaussianLaw{}, rng));
  const Eigen::VectorXd ev = descending_eigenvalues(to_dense(e));
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    CHECK(std::abs(ev(i) + ev(ev.size() - 1 - i)) < 1e-10);
  }
  const BlockCovarianceOperator op(off_diagonal_block(e));
  EigenOptions o;
  o.k = 2;
  const SpectralResult r = lanczos_top_k(op, o);
  CHECK(std::abs(r.eigenvalues[0] - ev(0)) < 1e-8);
  CHECK(std::abs(r.eigenvalues[1] - ev(1)) < 1e-8);
}

TEST_CASE("Weyl inequality on random pairs") {
  Rng rng(45);
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd a = random_symmetric(80, rng);
    const Eigen::MatrixXd b = 0.3 * random_symmetric(80, rng);
    const double norm_b = operator_norm(DenseOperator(b), 1e-12);
    const Eigen::VectorXd b_ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(b).eigenvalues();
    CHECK(norm_b == doctest::Approx(b_ev.cwiseAbs().maxCoeff()).epsilon(1e-6));
    const Eigen::VectorXd ea = descending_eigenvalues(a);
    const Eigen::VectorXd eab = descending_eigenvalues(a + b);
    for (int k = 0; k < 5; ++k) CHECK(std::abs(eab(k) - ea(k)) <= norm_b + 1e-10);
  }
}

TEST_CASE("overlap with two-site vectors") {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(10);
  v(2) = v(7) = 1.0 / std::sqrt(2.0);
  CHECK(overlap(v, 2, 7, 1) == doctest::Approx(1.0).epsilon(1e-15));
  v(7) = -v(7);
  CHECK(overlap(v, 2, 7, 1) == doctest::Approx(0.0));
  CHECK(overlap(v, 2, 7, -1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(overlap(v, 3, 3, 1), DomainError);
  CHECK_THROWS_AS(overlap(v, 3, 10, 1), DomainError);

  // Uniform unit vector: overlap is of order n^-1/2.
  Rng rng(46);
  Eigen::VectorXd u(1000);
  for (auto& x : u) x = rng.normal();
  u.normalize();
  CHECK(overlap(u, 0, 1, 1) < 5.0 / std::sqrt(1000.0));
}

TEST_CASE("localization target and event") {
  CHECK(localization_target(2.5) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(localization_target(2.0 + 1e-12) < 1e-5);
  CHECK_THROWS_AS(localization_target(2.0), DomainError);

  // A constructed eigenvector with squared overlap exactly t(lambda).
  for (double lambda : {2.3, 2.5, 3.0, 5.0}) {
    const double t = localization_target(lambda);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(50);
    const double a = std::sqrt(t / 2.0);
    v(4) = a;
    v(11) = -a;
    // The remaining mass spread thinly so the two-site part dominates.
    for (int i = 20; i < 50; ++i) v(i) = std::sqrt((1.0 - t) / 30.0);
    const LocalizationResult r = localization_event(v, lambda, 0.15);
    CHECK(r.holds);
    CHECK(r.sign == -1);
    CHECK(r.squared_overlap == doctest::Approx(t).epsilon(1e-12));
  }
}

TEST_CASE("matrix parameters from a variance profile") {
  VarianceProfile wigner{1000, 1.0 / 1000, 1.0 / 1000, std::numeric_limits<double>::infinity()};
  const MatrixParameters p = bvh_parameters(wigner);
  CHECK(p.sigma == doctest::Approx(1.0).epsilon(1e-14));
  const double bound = std::pow(std::log(1000.0), -5.0);
  VarianceProfile small{1000, 1.0 / 1000, 1.0 / 1000, bound};
  CHECK(bvh_parameters(small).universality_gate ==
        doctest::Approx(std::pow(std::log(1000.0), -3.0)).epsilon(1e-12));
  VarianceProfile bounded{400, 1.0 / 400, 1.0 / 400, 3.0 / 20.0};
  CHECK(bvh_parameters(bounded).r == 3.0 / 20.0);
  CHECK_THROWS_AS(bvh_parameters(VarianceProfile{0, 1.0, 1.0, 1.0}), DomainError);
}

TEST_CASE("top_k_eigs validates its arguments") {
  EnsembleSample s;
  s.kind = EnsembleKind::dense_wigner;
  s.rows = s.cols = 3;
  EigenOptions o;
  o.k = 0;
  CHECK_THROWS_AS(top_k_eigs(s, o), DomainError);
  o.k = 4;
  CHECK_THROWS_AS(top_k_eigs(s, o), DomainError);
  s.kind = EnsembleKind::covariance_factor;
  o.k = 1;
  CHECK_THROWS_AS(top_k_eigs(s, o), DomainError);
}

#include <doctest.h>

#include "spike/structured_cov.hpp"

#include "oracle_eigen.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>
#include <vector>

using spike::Matrix;
using spike::Philox;
using spike::StructuredCov;
using spike::Vector;
namespace cov = spike::cov;

namespace {

// A composite with every part kind: long-range block, diagonal tail with an
// intraclass overlay, plus a low-rank patch straddling the boundary region.
StructuredCov composite_a() {
  std::mt19937_64 rng(71);
  std::vector<cov::Part> parts;
  parts.push_back(cov::make_omega_part(0, 8, 0.3, 2.0));
  Vector d(17);
  for (Eigen::Index i = 0; i < 17; ++i) d[i] = 0.5 + 0.1 * double(i);
  parts.push_back(cov::Diagonal{8, d});
  parts.push_back(cov::Intraclass{10, 6, 1.5});
  parts.push_back(cov::LowRank{5, testref::gaussian_matrix(rng, 9, 2)});
  return StructuredCov(25, std::move(parts));
}

StructuredCov composite_b() {
  std::mt19937_64 rng(72);
  std::vector<cov::Part> parts;
  parts.push_back(cov::Intraclass{0, 12, 0.8});
  Vector d(13);
  for (Eigen::Index i = 0; i < 13; ++i) d[i] = 1.0 + 0.05 * double(i);
  parts.push_back(cov::Diagonal{12, d});
  parts.push_back(cov::make_omega_part(9, 10, 0.5, 1.0));
  return StructuredCov(25, std::move(parts));
}

}  // namespace

TEST_CASE("dense materialisation agrees with entry lookups") {
  const StructuredCov a = composite_a();
  const Matrix d = a.dense();
  CHECK(d.rows() == 25);
  for (Eigen::Index i = 0; i < 25; ++i)
    for (Eigen::Index j = 0; j < 25; ++j) {
      CHECK(a.entry(i, j) == doctest::Approx(d(i, j)).epsilon(1e-13));
      CHECK(d(i, j) == doctest::Approx(d(j, i)).epsilon(1e-13));
    }
  CHECK(a.trace() == doctest::Approx(d.trace()).epsilon(1e-12));
}

TEST_CASE("matvec and quadratic form match the dense matrix") {
  const StructuredCov a = composite_a();
  const Matrix d = a.dense();
  std::mt19937_64 rng(73);
  for (int rep = 0; rep < 10; ++rep) {
    const Vector x = testref::gaussian_vector(rng, 25);
    const Vector want = d * x;
    const Vector got = a.apply(x);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10 *
          std::max(1.0, want.cwiseAbs().maxCoeff()));
    CHECK(a.quad(x) == doctest::Approx(x.dot(want)).epsilon(1e-11));
    CHECK(a.quad(x) >= 0.0);  // every part is positive semidefinite
  }
}

TEST_CASE("intraclass block has the advertised spectrum and trace") {
  const double scale = 3.0;
  const Eigen::Index t = 11;
  const StructuredCov ic = spike::build_intraclass(t, scale);
  CHECK(ic.trace() == doctest::Approx(scale * double(t)).epsilon(1e-13));

  Vector vals;
  Matrix vecs;
  testref::jacobi_eigen(ic.dense(), vals, vecs);
  CHECK(vals[0] ==
        doctest::Approx(scale * double(t + 1) / 2.0).epsilon(1e-12));
  for (Eigen::Index r = 1; r < t; ++r)
    CHECK(vals[r] == doctest::Approx(scale * 0.5).epsilon(1e-12));
  // Leading eigenvector is the constant direction.
  const double c = std::abs(vecs.col(0).sum()) / std::sqrt(double(t));
  CHECK(c == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("long-range block: unit average variance and decaying correlation") {
  const Eigen::Index t = 16;
  const StructuredCov om = spike::build_omega(t, 0.3, 2.0);
  // Variance profile averages to one, so the trace is scale times t.
  CHECK(om.trace() == doctest::Approx(2.0 * double(t)).epsilon(1e-12));
  const Matrix d = om.dense();
  // Correlations fall off with distance but stay positive.
  const auto corr = [&](Eigen::Index i, Eigen::Index j) {
    return d(i, j) / std::sqrt(d(i, i) * d(j, j));
  };
  CHECK(corr(0, 1) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(corr(0, 8) == doctest::Approx(std::pow(0.3, std::cbrt(8.0)))
                          .epsilon(1e-12));
  CHECK(corr(3, 11) > corr(3, 15));
  // The Cholesky factor reproduces the matrix.
  Vector vals;
  Matrix vecs;
  testref::jacobi_eigen(d, vals, vecs);
  CHECK(vals[t - 1] > 0.0);
}

TEST_CASE("pairwise trace products match dense matrix algebra") {
  const StructuredCov a = composite_a();
  const StructuredCov b = composite_b();
  const Matrix da = a.dense(), db = b.dense();
  CHECK(spike::cross_trace(a, b) ==
        doctest::Approx((da * db).trace()).epsilon(1e-11));
  CHECK(spike::cross_trace(b, a) ==
        doctest::Approx((da * db).trace()).epsilon(1e-11));
  CHECK(spike::trace_sq(a) == doctest::Approx((da * da).trace()).epsilon(1e-11));
  CHECK(spike::trace_sq(b) == doctest::Approx((db * db).trace()).epsilon(1e-11));
}

TEST_CASE("self-pair closed forms match brute force") {
  const StructuredCov ic = spike::build_intraclass(9, 1.7);
  const Matrix d = ic.dense();
  CHECK(spike::trace_sq(ic) ==
        doctest::Approx((d * d).trace()).epsilon(1e-12));
  const StructuredCov om = spike::build_omega(12, 0.4);
  const Matrix e = om.dense();
  CHECK(spike::trace_sq(om) ==
        doctest::Approx((e * e).trace()).epsilon(1e-12));
}

TEST_CASE("construction validations") {
  CHECK_THROWS_AS(spike::build_omega(5, 1.0), spike::ConfigError);
  CHECK_THROWS_AS(spike::build_omega(5, -0.1), spike::ConfigError);
  CHECK_THROWS_AS(spike::build_omega(0, 0.3), spike::ConfigError);
  CHECK_THROWS_AS(spike::build_intraclass(3, 0.0), spike::ConfigError);
  std::vector<cov::Part> parts;
  parts.push_back(cov::Intraclass{4, 5, 1.0});  // runs past dimension 8
  CHECK_THROWS_AS(StructuredCov(8, std::move(parts)), spike::ConfigError);
}

TEST_CASE("sampling reproduces the covariance for both innovation laws") {
  const StructuredCov a = composite_a();
  const Matrix d = a.dense();
  for (spike::Innovation kind :
       {spike::Innovation::gaussian, spike::Innovation::chisq1}) {
    Philox rng(987, kind == spike::Innovation::gaussian ? 0 : 1);
    const int reps = 40000;
    Vector mean = Vector::Zero(25);
    Matrix second = Matrix::Zero(25, 25);
    for (int i = 0; i < reps; ++i) {
      Vector x = Vector::Zero(25);
      a.add_sample(rng, kind, x);
      mean += x;
      second += x * x.transpose();
    }
    mean /= double(reps);
    second /= double(reps);
    CHECK(mean.cwiseAbs().maxCoeff() < 0.12);
    const Matrix err = second - mean * mean.transpose() - d;
    // Monte Carlo tolerance: entry variances are O(max diag^2) / reps.
    CHECK(err.cwiseAbs().maxCoeff() < 0.45);
  }
}

TEST_CASE("power iteration matches the dense reference eigensolver") {
  const StructuredCov a = composite_a();
  Vector vals;
  Matrix vecs;
  spike::top_eigenpairs(a, 3, vecs, vals);

  Vector ref_vals;
  Matrix ref_vecs;
  testref::jacobi_eigen(a.dense(), ref_vals, ref_vecs);
  for (int r = 0; r < 3; ++r) {
    CHECK(vals[r] == doctest::Approx(ref_vals[r]).epsilon(1e-9));
    const Vector resid = a.apply(vecs.col(r)) - vals[r] * vecs.col(r);
    CHECK(resid.norm() < 1e-7 * std::max(1.0, vals[r]));
    CHECK(vecs.col(r).norm() == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(std::abs(vecs.col(0).dot(vecs.col(1))) < 1e-9);
  CHECK_THROWS_AS(spike::top_eigenpairs(a, 0, vecs, vals),
                  spike::ConfigError);
}

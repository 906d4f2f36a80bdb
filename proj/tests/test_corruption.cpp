#include <catch2/catch.hpp>

#include "mtrob/corruption.hpp"
#include "oracles.hpp"

using namespace mtrob;

TEST_CASE("additive noise with sigma 0 is the identity") {
  const Matrix w = oracles::random_matrix(5, 7, 1);
  const Matrix out = apply_additive_noise(w, 0.0, 123);
  REQUIRE((out - w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("additive noise has the requested variance") {
  const Matrix w = Matrix::Zero(100, 100);
  const Matrix out = apply_additive_noise(w, 1.0, 42);
  const double n = static_cast<double>(out.size());
  const double mean = out.sum() / n;
  const double var = out.squaredNorm() / n - mean * mean;
  // Chi-square concentration at 3 sigma for 10^4 samples.
  REQUIRE(var > 0.94);
  REQUIRE(var < 1.06);
  REQUIRE(std::abs(mean) <= 3.0 / std::sqrt(n));
}

TEST_CASE("additive noise is deterministic given the seed") {
  const Matrix w = oracles::random_matrix(6, 6, 2);
  const Matrix a = apply_additive_noise(w, 0.3, 777);
  const Matrix b = apply_additive_noise(w, 0.3, 777);
  REQUIRE((a - b).cwiseAbs().maxCoeff() == 0.0);
  const Matrix c = apply_additive_noise(w, 0.3, 778);
  REQUIRE((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("additive noise rejects negative sigma") {
  REQUIRE_THROWS_AS(apply_additive_noise(Matrix::Zero(2, 2), -0.1, 0),
                    ParameterError);
  REQUIRE_THROWS_AS(CorruptionSpec::additive_gaussian(-1.0), ParameterError);
}

TEST_CASE("random deletion endpoints") {
  const Matrix w = oracles::random_matrix(4, 9, 3);
  REQUIRE((apply_random_deletion(w, 0.0, 5) - w).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(apply_random_deletion(w, 1.0, 5).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("random deletion zeroes close to the requested fraction") {
  const Matrix w = Matrix::Ones(1000, 1000);
  const Matrix out = apply_random_deletion(w, 0.3, 9);
  const double zero_fraction =
      1.0 - out.sum() / static_cast<double>(out.size());
  REQUIRE(zero_fraction > 0.29);  // binomial 3-sigma bound
  REQUIRE(zero_fraction < 0.31);
}

TEST_CASE("random deletion is seeded and validates p") {
  const Matrix w = oracles::random_matrix(8, 8, 4);
  REQUIRE((apply_random_deletion(w, 0.4, 11) - apply_random_deletion(w, 0.4, 11))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  REQUIRE_THROWS_AS(apply_random_deletion(w, -0.01, 0), ParameterError);
  REQUIRE_THROWS_AS(apply_random_deletion(w, 1.01, 0), ParameterError);
}

TEST_CASE("magnitude pruning removes the smallest half") {
  Matrix w(2, 2);
  w << 1, 2, 3, 4;
  Matrix expected(2, 2);
  expected << 0, 0, 3, 4;
  REQUIRE((apply_magnitude_pruning(w, 0.5) - expected).cwiseAbs().maxCoeff() ==
          0.0);
  REQUIRE((apply_magnitude_pruning(w, 0.0) - w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("magnitude pruning breaks ties by row-major index") {
  const Matrix w = Matrix::Ones(2, 2);
  const Matrix out = apply_magnitude_pruning(w, 0.25);
  REQUIRE(out(0, 0) == 0.0);  // earliest flattened index goes first
  REQUIRE(out(0, 1) == 1.0);
  REQUIRE(out(1, 0) == 1.0);
  REQUIRE(out(1, 1) == 1.0);
}

TEST_CASE("magnitude pruning never removes an entry above a survivor") {
  const Matrix w = oracles::random_matrix(17, 13, 6);
  const Matrix out = apply_magnitude_pruning(w, 0.37);
  double largest_pruned = -1.0;
  double smallest_survivor = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = 0; j < w.cols(); ++j) {
      if (out(i, j) == 0.0 && w(i, j) != 0.0)
        largest_pruned = std::max(largest_pruned, std::abs(w(i, j)));
      if (out(i, j) != 0.0)
        smallest_survivor = std::min(smallest_survivor, std::abs(w(i, j)));
    }
  REQUIRE(largest_pruned <= smallest_survivor);
  // floor(p * n) entries go.
  const auto zeros = static_cast<int>((out.array() == 0.0).count());
  REQUIRE(zeros == static_cast<int>(0.37 * 17 * 13));
}

TEST_CASE("all operators preserve shape and finiteness") {
  const Matrix w = oracles::random_matrix(9, 5, 7);
  for (const Matrix& out :
       {apply_additive_noise(w, 2.5, 1), apply_random_deletion(w, 0.5, 2),
        apply_magnitude_pruning(w, 0.5)}) {
    REQUIRE(out.rows() == w.rows());
    REQUIRE(out.cols() == w.cols());
    REQUIRE(out.allFinite());
  }
}

TEST_CASE("corruption spec pairs parameters with kinds") {
  const CorruptionSpec gauss = CorruptionSpec::additive_gaussian(0.5, 3);
  REQUIRE(gauss.kind == CorruptionKind::additive_gaussian);
  REQUIRE(gauss.sigma == 0.5);
  REQUIRE(gauss.p == 0.0);
  const CorruptionSpec del = CorruptionSpec::random_deletion(0.25, 4);
  REQUIRE(del.p == 0.25);
  REQUIRE(del.sigma == 0.0);
  REQUIRE_THROWS_AS(CorruptionSpec::random_deletion(1.5), ParameterError);
  REQUIRE_THROWS_AS(CorruptionSpec::magnitude_prune(-0.5), ParameterError);
  REQUIRE(corruption_kind_from_string("magnitude-prune") ==
          CorruptionKind::magnitude_prune);
  REQUIRE_THROWS_AS(corruption_kind_from_string("bitflip"), ParameterError);
}

#include <catch_amalgamated.hpp>

#include "rectnet/matrix.hpp"

using namespace rectnet;

TEST_CASE("matvec computes rows-by-vector products", "[matrix]") {
  Matrix m(2, 3);
  m(0, 0) = 1;
  m(0, 1) = 2;
  m(0, 2) = 3;
  m(1, 0) = -1;
  m(1, 1) = 0;
  m(1, 2) = 1;
  Vector v{1, 1, 2};
  Vector out = matvec(m, v);
  REQUIRE(out == Vector{9, 1});
  REQUIRE_THROWS_AS(matvec(m, Vector{1, 2}), DimensionMismatch);
}

TEST_CASE("matmul matches hand computation", "[matrix]") {
  Matrix a(2, 2), b(2, 2);
  a(0, 0) = 1;
  a(0, 1) = 2;
  a(1, 0) = 3;
  a(1, 1) = 4;
  b(0, 0) = 0;
  b(0, 1) = 1;
  b(1, 0) = 1;
  b(1, 1) = 0;
  Matrix c = matmul(a, b);
  REQUIRE(c(0, 0) == 2);
  REQUIRE(c(0, 1) == 1);
  REQUIRE(c(1, 0) == 4);
  REQUIRE(c(1, 1) == 3);
  REQUIRE_THROWS_AS(matmul(a, Matrix(3, 2)), DimensionMismatch);
}

TEST_CASE("vstack stacks rows and checks columns", "[matrix]") {
  Matrix a(1, 2), b(2, 2);
  a(0, 0) = 1;
  a(0, 1) = 2;
  b(0, 0) = 3;
  b(0, 1) = 4;
  b(1, 0) = 5;
  b(1, 1) = 6;
  Matrix s = vstack(a, b);
  REQUIRE(s.rows == 3);
  REQUIRE(s.cols == 2);
  REQUIRE(row_of(s, 0) == Vector{1, 2});
  REQUIRE(row_of(s, 2) == Vector{5, 6});
  REQUIRE_THROWS_AS(vstack(a, Matrix(1, 3)), DimensionMismatch);
}

TEST_CASE("vector helpers", "[matrix]") {
  REQUIRE(relu(Vector{-1, 0, 2}) == Vector{0, 0, 2});
  REQUIRE(dot(Vector{1, 2}, Vector{3, 4}) == 11.0);
  REQUIRE(concat(Vector{1}, Vector{2, 3}) == Vector{1, 2, 3});
  REQUIRE(vec_add(Vector{1, 2}, Vector{3, 4}) == Vector{4, 6});
  Vector y{1, 1};
  axpy(y, 2.0, Vector{1, -1});
  REQUIRE(y == Vector{3, -1});
  REQUIRE_THROWS_AS(dot(Vector{1}, Vector{1, 2}), DimensionMismatch);
}

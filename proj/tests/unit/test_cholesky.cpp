#include <doctest.h>

#include "subind/cholesky_update.hpp"

#include <random>

using namespace subind;

TEST_CASE("append and remove track the principal submatrix") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const Index n = 9;
  Matrix<double> B(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) B(i, j) = g(rng);
  const Matrix<double> A = B * B.transpose() + Matrix<double>::Identity(n, n);

  UpdatableCholesky<double> chol(2);
  std::vector<Index> members;
  const auto add = [&](Index v) {
    Vector<double> col(static_cast<Index>(members.size()));
    for (std::size_t p = 0; p < members.size(); ++p) col[static_cast<Index>(p)] = A(members[p], v);
    chol.append(col, A(v, v));
    members.push_back(v);
  };
  const auto expected = [&] {
    Matrix<double> S(members.size(), members.size());
    for (std::size_t p = 0; p < members.size(); ++p)
      for (std::size_t q = 0; q < members.size(); ++q) S(p, q) = A(members[p], members[q]);
    return S;
  };

  for (Index v = 0; v < n; ++v) add(v);
  CHECK((chol.reconstruct() - A).norm() <= 1e-10 * A.norm());

  for (Index position : {3, 0, 5}) {
    chol.remove(position);
    members.erase(members.begin() + position);
    CHECK((chol.reconstruct() - expected()).norm() <= 1e-10 * A.norm());
  }
  add(3);
  add(0);
  CHECK((chol.reconstruct() - expected()).norm() <= 1e-10 * A.norm());

  Vector<double> b = Vector<double>::LinSpaced(chol.size(), 1.0, 2.0);
  CHECK((expected() * chol.solve(b) - b).norm() <= 1e-10);

  while (chol.size() > 0) chol.remove(chol.size() - 1);
  CHECK(chol.solve(Vector<double>()).size() == 0);
}

TEST_CASE("append rejects an indefinite border") {
  UpdatableCholesky<double> chol;
  chol.append(Vector<double>(), 1.0);
  Vector<double> col(1);
  col << 2.0;
  CHECK_THROWS_AS(chol.append(col, 1.0), NumericalError);
  CHECK_THROWS_AS(chol.remove(4), InputError);
}

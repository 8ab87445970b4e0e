#include "subind/lattice.hpp"

#include <algorithm>
#include <sstream>

namespace subind {

BinaryVector SignSplitMap::to_original(const BinaryVector& zbin) const {
  if (static_cast<Index>(zbin.size()) != binary_dim())
    throw InputError("to_original: binary vector has wrong dimension");
  BinaryVector z(classes.size(), 0);
  for (Index i = 0; i < num_variables(); ++i) {
    const int zp = plus_coordinate[i] >= 0 ? zbin[plus_coordinate[i]] : 0;
    const int zm = minus_coordinate[i] >= 0 ? zbin[minus_coordinate[i]] : 1;
    z[i] = static_cast<std::uint8_t>(std::min(1, zp + 1 - zm));
  }
  return z;
}

BinaryVector SignSplitMap::from_original(const BinaryVector& z, const Vector<double>& x) const {
  if (static_cast<Index>(z.size()) != num_variables() || x.size() != num_variables())
    throw InputError("from_original: vector has wrong dimension");
  BinaryVector zbin(coordinates.size(), 0);
  for (Index i = 0; i < num_variables(); ++i) {
    const bool on = z[i] != 0;
    switch (classes[i]) {
      case SignClass::plus:
        zbin[plus_coordinate[i]] = on;
        break;
      case SignClass::minus:
        zbin[minus_coordinate[i]] = !on;
        break;
      case SignClass::plus_minus:
        if (!on) {
          zbin[plus_coordinate[i]] = 0;
          zbin[minus_coordinate[i]] = 1;
        } else if (x[i] > 0.0) {
          zbin[plus_coordinate[i]] = 1;
          zbin[minus_coordinate[i]] = 1;
        } else {
          zbin[plus_coordinate[i]] = 0;
          zbin[minus_coordinate[i]] = 0;
        }
        break;
    }
  }
  return zbin;
}

double BinaryCost::evaluate(const BinaryVector& zbin) const {
  if (static_cast<Index>(zbin.size()) != linear.size())
    throw InputError("BinaryCost: binary vector has wrong dimension");
  double total = constant;
  for (Index k = 0; k < linear.size(); ++k)
    if (zbin[k]) total += linear[k];
  return total;
}

SplitResult split(const Vector<double>& lower, const Vector<double>& upper,
                  const Vector<double>& costs) {
  const Index n = lower.size();
  if (upper.size() != n || costs.size() != n)
    throw InputError("split: bounds and costs must have the same length");
  SplitResult out;
  SignSplitMap& map = out.map;
  map.classes.resize(n);
  map.plus_coordinate.assign(n, -1);
  map.minus_coordinate.assign(n, -1);
  for (Index i = 0; i < n; ++i) {
    if (!(lower[i] <= upper[i])) {
      std::ostringstream msg;
      msg << "split: lower bound exceeds upper bound at index " << i;
      throw InputError(msg.str());
    }
    if (lower[i] >= 0.0) {
      map.classes[i] = SignClass::plus;
      map.n_plus.push_back(i);
    } else if (upper[i] <= 0.0) {
      map.classes[i] = SignClass::minus;
      map.n_minus.push_back(i);
    } else {
      map.classes[i] = SignClass::plus_minus;
      map.n_pm.push_back(i);
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (map.classes[i] != SignClass::minus) {
      map.plus_coordinate[i] = static_cast<Index>(map.coordinates.size());
      map.coordinates.push_back({i, SplitSide::plus});
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (map.classes[i] != SignClass::plus) {
      map.minus_coordinate[i] = static_cast<Index>(map.coordinates.size());
      map.coordinates.push_back({i, SplitSide::minus});
    }
  }

  // c z+ on N+, c (1 - z-) on N-, c (z+ + 1 - z-) on N+-.
  out.cost.linear = Vector<double>::Zero(map.binary_dim());
  for (Index i = 0; i < n; ++i) {
    if (map.plus_coordinate[i] >= 0) out.cost.linear[map.plus_coordinate[i]] = costs[i];
    if (map.minus_coordinate[i] >= 0) {
      out.cost.linear[map.minus_coordinate[i]] = -costs[i];
      out.cost.constant += costs[i];
    }
  }
  return out;
}

std::optional<ZerothOrderWitness> check_submodular_zeroth(
    const std::function<double(const Vector<double>&)>& fun, std::span<const Vector<double>> probes,
    std::span<const double> steps, double tol) {
  for (const auto& y : probes) {
    const Index n = y.size();
    const double base = fun(y);
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        for (double ci : steps) {
          for (double cj : steps) {
            if (!(ci > 0.0 && cj > 0.0)) throw InputError("check_submodular_zeroth: steps must be positive");
            Vector<double> yi = y, yj = y, yij = y;
            yi[i] += ci;
            yj[j] += cj;
            yij[i] += ci;
            yij[j] += cj;
            const double lhs = fun(yi) + fun(yj);
            const double rhs = base + fun(yij);
            if (lhs < rhs - tol) return ZerothOrderWitness{y, i, j, ci, cj, lhs, rhs};
          }
        }
      }
    }
  }
  return std::nullopt;
}

std::optional<FirstOrderWitness> check_submodular_first(
    const std::function<Vector<double>(const Vector<double>&)>& gradient,
    std::span<const Vector<double>> probes, std::span<const double> steps, double tol) {
  for (const auto& y : probes) {
    const Index n = y.size();
    for (Index j = 0; j < n; ++j) {
      for (double c1 : steps) {
        for (double c2 : steps) {
          if (c1 < c2) continue;
          Vector<double> y1 = y, y2 = y;
          y1[j] += c1;
          y2[j] += c2;
          const Vector<double> g1 = gradient(y1);
          const Vector<double> g2 = gradient(y2);
          for (Index i = 0; i < n; ++i) {
            if (i == j) continue;
            if (g1[i] > g2[i] + tol) return FirstOrderWitness{y, i, j, c1, c2, g1[i] - g2[i]};
          }
        }
      }
    }
  }
  return std::nullopt;
}

std::optional<SecondOrderWitness> check_submodular_second(const Matrix<double>& hessian, double tol) {
  for (Index i = 0; i < hessian.rows(); ++i)
    for (Index j = 0; j < hessian.cols(); ++j)
      if (i != j && hessian(i, j) > tol) return SecondOrderWitness{i, j, hessian(i, j)};
  return std::nullopt;
}

namespace {

BinaryVector unpack(std::uint32_t mask, Index m) {
  BinaryVector z(m, 0);
  for (Index k = 0; k < m; ++k) z[k] = (mask >> k) & 1u;
  return z;
}

}  // namespace

std::optional<SetFunctionWitness> check_set_function_submodular(
    const std::function<double(const BinaryVector&)>& fun, Index m, double tol) {
  if (m < 0 || m > 20) throw InputError("check_set_function_submodular: dimension must be in [0, 20]");
  const std::uint32_t count = 1u << m;
  std::vector<double> values(count);
  for (std::uint32_t mask = 0; mask < count; ++mask) values[mask] = fun(unpack(mask, m));
  for (std::uint32_t first = 0; first < count; ++first) {
    for (std::uint32_t second = first + 1; second < count; ++second) {
      const double lhs = values[first] + values[second];
      const double rhs = values[first & second] + values[first | second];
      if (lhs < rhs - tol) return SetFunctionWitness{unpack(first, m), unpack(second, m), lhs, rhs};
    }
  }
  return std::nullopt;
}

bool in_lattice_set(LatticeKind kind, double lower, double upper, const Vector<double>& point) {
  const auto binary = [](double v) { return v == 0.0 || v == 1.0; };
  switch (kind) {
    case LatticeKind::l_plus:
    case LatticeKind::l_minus: {
      if (point.size() != 2) throw InputError("lattice point must be (x, z)");
      const double x = point[0], z = point[1];
      if (!binary(z)) return false;
      const bool on = kind == LatticeKind::l_plus ? z == 1.0 : z == 0.0;
      return scale_bound(lower, on) <= x && x <= scale_bound(upper, on);
    }
    case LatticeKind::l_pm: {
      if (point.size() != 3) throw InputError("lattice point must be (x, z+, z-)");
      const double x = point[0], zp = point[1], zm = point[2];
      if (!binary(zp) || !binary(zm)) return false;
      return scale_bound(lower, zm == 0.0) <= x && x <= scale_bound(upper, zp == 1.0);
    }
  }
  return false;
}

LatticeCheck check_lattice_membership(LatticeKind kind, double lower, double upper,
                                      const Vector<double>& first, const Vector<double>& second) {
  if (!in_lattice_set(kind, lower, upper, first))
    throw InputError("check_lattice_membership: first point is not in the set");
  if (!in_lattice_set(kind, lower, upper, second))
    throw InputError("check_lattice_membership: second point is not in the set");
  LatticeCheck out;
  out.meet = first.cwiseMin(second);
  out.join = first.cwiseMax(second);
  out.meet_member = in_lattice_set(kind, lower, upper, out.meet);
  out.join_member = in_lattice_set(kind, lower, upper, out.join);
  return out;
}

}  // namespace subind

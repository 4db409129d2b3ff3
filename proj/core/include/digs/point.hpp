#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "digs/error.hpp"

namespace digs {

/// Sampler state: a d-dimensional real vector.
using Point = Eigen::VectorXd;
using PointSet = std::vector<Point>;

inline bool all_finite(const Point& x) { return x.allFinite(); }

inline void require_dim(const Point& x, int dim, const char* where) {
  if (x.size() != dim) {
    throw ContractViolation(std::string(where) + ": expected dimension " + std::to_string(dim) +
                            ", got " + std::to_string(x.size()));
  }
}

inline Point make_point(std::initializer_list<double> values) {
  Point p(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) p(i++) = v;
  return p;
}

}  // namespace digs

#pragma once

// Two-factor product spaces. Cells are indexed row-major: cell(i, j) = i*q + j
// for i < p, j < q. Subsets of the product reuse SubsetMask over p*q points.

#include <string>
#include <vector>

#include "capot/ground.hpp"

namespace capot {

enum class Axis { x, y };

class ProductSpace {
 public:
  ProductSpace() = default;
  ProductSpace(GroundSet x, GroundSet y);

  const GroundSet& x() const { return x_; }
  const GroundSet& y() const { return y_; }
  // Flattened ground set of the p*q cells, labeled "<x>|<y>".
  const GroundSet& cells() const { return cells_; }

  std::size_t p() const { return x_.size(); }
  std::size_t q() const { return y_.size(); }
  std::size_t size() const { return x_.size() * y_.size(); }

  std::size_t cell(std::size_t i, std::size_t j) const { return i * q() + j; }
  std::size_t row_of(std::size_t c) const { return c / q(); }
  std::size_t col_of(std::size_t c) const { return c % q(); }

  // Mask of the rectangle A x B from marginal masks.
  SubsetMask rectangle(const SubsetMask& a, const SubsetMask& b) const;
  SubsetMask row_cylinder(const SubsetMask& a) const;  // A x Y
  SubsetMask col_cylinder(const SubsetMask& b) const;  // X x B

  bool operator==(const ProductSpace& o) const { return x_ == o.x_ && y_ == o.y_; }

 private:
  GroundSet x_, y_, cells_;
};

// Existential projection: points of the chosen axis whose slice meets N.
SubsetMask project_exists(const ProductSpace& sp, const SubsetMask& cells, Axis axis);

// Universal projection: points whose whole slice lies inside N. Dual to the
// existential one through complements.
SubsetMask project_forall(const ProductSpace& sp, const SubsetMask& cells, Axis axis);

// A cost / loss function on the cells of a product space, stored row-major.
class LossMatrix {
 public:
  LossMatrix() = default;
  LossMatrix(ProductSpace sp, std::vector<double> values);

  const ProductSpace& space() const { return space_; }
  double at(std::size_t i, std::size_t j) const { return values_[space_.cell(i, j)]; }
  const std::vector<double>& values() const { return values_; }

  GroundFunction flatten() const { return GroundFunction(space_.cells(), values_); }

  std::vector<double> row_min() const;  // per x: min over y
  std::vector<double> row_max() const;
  std::vector<double> col_min() const;  // per y: min over x
  std::vector<double> col_max() const;

 private:
  ProductSpace space_;
  std::vector<double> values_;
};

}  // namespace capot

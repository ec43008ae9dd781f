#include "capot/product.hpp"

#include <cmath>
#include <stdexcept>

namespace capot {

ProductSpace::ProductSpace(GroundSet x, GroundSet y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() == 0 || y_.size() == 0)
    throw std::invalid_argument("ProductSpace: factors must be nonempty");
  std::vector<std::string> labels;
  labels.reserve(x_.size() * y_.size());
  for (const auto& lx : x_.labels())
    for (const auto& ly : y_.labels()) labels.push_back(lx + "|" + ly);
  cells_ = GroundSet(std::move(labels));
}

SubsetMask ProductSpace::rectangle(const SubsetMask& a, const SubsetMask& b) const {
  if (a.universe() != p() || b.universe() != q())
    throw std::invalid_argument("rectangle: marginal mask universe mismatch");
  SubsetMask r(size());
  a.for_each([&](std::size_t i) { b.for_each([&](std::size_t j) { r.set(cell(i, j)); }); });
  return r;
}

SubsetMask ProductSpace::row_cylinder(const SubsetMask& a) const {
  return rectangle(a, SubsetMask::full(q()));
}

SubsetMask ProductSpace::col_cylinder(const SubsetMask& b) const {
  return rectangle(SubsetMask::full(p()), b);
}

SubsetMask project_exists(const ProductSpace& sp, const SubsetMask& cells, Axis axis) {
  if (cells.universe() != sp.size())
    throw std::invalid_argument("projection: cell mask universe mismatch");
  SubsetMask out(axis == Axis::x ? sp.p() : sp.q());
  cells.for_each([&](std::size_t c) {
    out.set(axis == Axis::x ? sp.row_of(c) : sp.col_of(c));
  });
  return out;
}

SubsetMask project_forall(const ProductSpace& sp, const SubsetMask& cells, Axis axis) {
  if (cells.universe() != sp.size())
    throw std::invalid_argument("projection: cell mask universe mismatch");
  const std::size_t n = axis == Axis::x ? sp.p() : sp.q();
  const std::size_t m = axis == Axis::x ? sp.q() : sp.p();
  SubsetMask out(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool whole = true;
    for (std::size_t j = 0; j < m && whole; ++j)
      whole = cells.test(axis == Axis::x ? sp.cell(i, j) : sp.cell(j, i));
    if (whole) out.set(i);
  }
  return out;
}

LossMatrix::LossMatrix(ProductSpace sp, std::vector<double> values)
    : space_(std::move(sp)), values_(std::move(values)) {
  if (values_.size() != space_.size())
    throw std::invalid_argument("LossMatrix: need one value per cell");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("LossMatrix: non-finite entry");
}

std::vector<double> LossMatrix::row_min() const {
  std::vector<double> out(space_.p());
  for (std::size_t i = 0; i < space_.p(); ++i) {
    double m = values_[space_.cell(i, 0)];
    for (std::size_t j = 1; j < space_.q(); ++j) m = std::min(m, at(i, j));
    out[i] = m;
  }
  return out;
}

std::vector<double> LossMatrix::row_max() const {
  std::vector<double> out(space_.p());
  for (std::size_t i = 0; i < space_.p(); ++i) {
    double m = values_[space_.cell(i, 0)];
    for (std::size_t j = 1; j < space_.q(); ++j) m = std::max(m, at(i, j));
    out[i] = m;
  }
  return out;
}

std::vector<double> LossMatrix::col_min() const {
  std::vector<double> out(space_.q());
  for (std::size_t j = 0; j < space_.q(); ++j) {
    double m = values_[space_.cell(0, j)];
    for (std::size_t i = 1; i < space_.p(); ++i) m = std::min(m, at(i, j));
    out[j] = m;
  }
  return out;
}

std::vector<double> LossMatrix::col_max() const {
  std::vector<double> out(space_.q());
  for (std::size_t j = 0; j < space_.q(); ++j) {
    double m = values_[space_.cell(0, j)];
    for (std::size_t i = 1; i < space_.p(); ++i) m = std::max(m, at(i, j));
    out[j] = m;
  }
  return out;
}

}  // namespace capot

#pragma once

// Finite ground sets, subset masks and point functions. A SubsetMask is the
// universal index for set functions: for small universes (<= 64 points) it is
// a single machine word, for product spaces it grows into a word vector.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace capot {

// Default absolute tolerance for set-function equality / monotonicity checks.
inline constexpr double kDefaultTol = 1e-9;

// Dense capacity tables are capped at 2^25 entries.
inline constexpr std::size_t kDenseLimit = 25;

class GroundSet {
 public:
  GroundSet() : labels_(std::make_shared<const std::vector<std::string>>()) {}

  explicit GroundSet(std::vector<std::string> labels)
      : labels_(std::make_shared<const std::vector<std::string>>(std::move(labels))) {
    for (const auto& l : *labels_)
      if (l.empty()) throw std::invalid_argument("GroundSet: empty label");
  }

  // z0, z1, ... convenience ground set.
  static GroundSet indexed(std::size_t n, std::string_view prefix = "z") {
    std::vector<std::string> ls;
    ls.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ls.push_back(std::string(prefix) + std::to_string(i));
    return GroundSet(std::move(ls));
  }

  std::size_t size() const { return labels_->size(); }
  const std::string& label(std::size_t i) const { return labels_->at(i); }
  const std::vector<std::string>& labels() const { return *labels_; }

  // Index of a label, or npos.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t find(std::string_view label) const {
    for (std::size_t i = 0; i < labels_->size(); ++i)
      if ((*labels_)[i] == label) return i;
    return npos;
  }

  bool operator==(const GroundSet& o) const {
    return labels_ == o.labels_ || *labels_ == *o.labels_;
  }

 private:
  std::shared_ptr<const std::vector<std::string>> labels_;
};

class SubsetMask {
 public:
  SubsetMask() = default;

  explicit SubsetMask(std::size_t universe)
      : n_(universe), words_((universe + 63) / 64, 0) {}

  // Small-universe constructor from literal bits.
  SubsetMask(std::size_t universe, std::uint64_t low_bits) : SubsetMask(universe) {
    if (universe < 64 && (low_bits >> universe) != 0)
      throw std::invalid_argument("SubsetMask: bits outside universe");
    if (!words_.empty()) words_[0] = low_bits;
  }

  static SubsetMask full(std::size_t universe) {
    SubsetMask m(universe);
    for (std::size_t w = 0; w < m.words_.size(); ++w) m.words_[w] = ~0ull;
    m.trim();
    return m;
  }

  std::size_t universe() const { return n_; }

  bool test(std::size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  SubsetMask& set(std::size_t i) {
    words_[i >> 6] |= 1ull << (i & 63);
    return *this;
  }
  SubsetMask& reset(std::size_t i) {
    words_[i >> 6] &= ~(1ull << (i & 63));
    return *this;
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool none() const {
    for (auto w : words_)
      if (w) return false;
    return true;
  }
  bool all() const { return count() == n_; }

  bool subset_of(const SubsetMask& o) const {
    check_same(o);
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & ~o.words_[w]) return false;
    return true;
  }

  SubsetMask complement() const {
    SubsetMask r(*this);
    for (auto& w : r.words_) w = ~w;
    r.trim();
    return r;
  }

  friend SubsetMask operator&(SubsetMask a, const SubsetMask& b) {
    a.check_same(b);
    for (std::size_t w = 0; w < a.words_.size(); ++w) a.words_[w] &= b.words_[w];
    return a;
  }
  friend SubsetMask operator|(SubsetMask a, const SubsetMask& b) {
    a.check_same(b);
    for (std::size_t w = 0; w < a.words_.size(); ++w) a.words_[w] |= b.words_[w];
    return a;
  }
  // Set difference a \ b.
  friend SubsetMask operator-(SubsetMask a, const SubsetMask& b) {
    a.check_same(b);
    for (std::size_t w = 0; w < a.words_.size(); ++w) a.words_[w] &= ~b.words_[w];
    return a;
  }

  // Dense table index; the universe must fit one word.
  std::uint64_t low_bits() const {
    if (n_ > 64) throw std::logic_error("SubsetMask: universe too large for low_bits");
    return words_.empty() ? 0 : words_[0];
  }

  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    out.reserve(count());
    for_each([&](std::size_t i) { out.push_back(i); });
    return out;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t x = words_[w];
      while (x) {
        const int b = std::countr_zero(x);
        f(static_cast<std::size_t>(w * 64 + b));
        x &= x - 1;
      }
    }
  }

  bool operator==(const SubsetMask& o) const = default;

 private:
  void check_same(const SubsetMask& o) const {
    if (n_ != o.n_) throw std::invalid_argument("SubsetMask: universe mismatch");
  }
  void trim() {
    if (n_ & 63) words_.back() &= (1ull << (n_ & 63)) - 1;
  }

  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

// A real-valued function on the points of a ground set.
struct GroundFunction {
  GroundSet ground;
  std::vector<double> values;

  GroundFunction() = default;
  GroundFunction(GroundSet g, std::vector<double> v) : ground(std::move(g)), values(std::move(v)) {
    if (values.size() != ground.size())
      throw std::invalid_argument("GroundFunction: value count does not match ground set");
  }

  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

}  // namespace capot

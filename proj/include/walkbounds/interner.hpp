#pragma once

#include <cstdint>
#include <vector>

#include "walkbounds/group.hpp"

namespace walkbounds {

using ElementId = std::int32_t;

/// Maps canonical forms to dense integer ids, stable for the table's life.
/// Id 0 is always the identity.
class ElementTable {
 public:
  explicit ElementTable(Group group, std::size_t max_elements = 100'000'000);

  /// Returns the id of `code`, inserting it if new. Throws BudgetExceeded
  /// (reached = -1) past max_elements.
  ElementId intern(CodeView code);
  /// -1 when absent.
  ElementId find(CodeView code) const;

  CodeView code(ElementId id) const noexcept {
    return {pool_.data() + offsets_[id], pool_.data() + offsets_[id + 1]};
  }
  Element element(ElementId id) const;
  double length(ElementId id) const noexcept { return lengths_[id]; }
  std::size_t size() const noexcept { return lengths_.size(); }
  const Group& group() const noexcept { return group_; }
  std::size_t memory_bytes() const noexcept;

 private:
  void rehash(std::size_t capacity);

  Group group_;
  std::size_t max_elements_;
  std::vector<std::int32_t> pool_;
  std::vector<std::size_t> offsets_{0};
  std::vector<double> lengths_;
  std::vector<std::uint64_t> hashes_;
  std::vector<ElementId> slots_;  // open addressing, -1 = empty
};

/// Lazily filled table of x*g (or g*x) for a fixed list of elements g.
class NeighborCache {
 public:
  enum class Side { Right, Left };

  NeighborCache(ElementTable& table, std::vector<Element> steps, Side side);

  ElementId get(ElementId x, std::size_t j);
  std::size_t width() const noexcept { return steps_.size(); }

 private:
  ElementTable& table_;
  std::vector<Element> steps_;
  Side side_;
  std::vector<ElementId> cache_;  // row-major, -1 = not yet computed
  Code scratch_;
};

}  // namespace walkbounds

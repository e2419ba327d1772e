#include "walkbounds/interner.hpp"

#include <algorithm>

#include "group_model.hpp"
#include "walkbounds/error.hpp"

namespace walkbounds {

ElementTable::ElementTable(Group group, std::size_t max_elements)
    : group_(std::move(group)), max_elements_(max_elements) {
  rehash(1024);
  intern(group_.identity().view());
}

std::size_t ElementTable::memory_bytes() const noexcept {
  return pool_.capacity() * sizeof(std::int32_t) +
         offsets_.capacity() * sizeof(std::size_t) +
         lengths_.capacity() * sizeof(double) +
         hashes_.capacity() * sizeof(std::uint64_t) +
         slots_.capacity() * sizeof(ElementId);
}

void ElementTable::rehash(std::size_t capacity) {
  slots_.assign(capacity, -1);
  const std::size_t mask = capacity - 1;
  for (std::size_t id = 0; id < hashes_.size(); ++id) {
    std::size_t s = hashes_[id] & mask;
    while (slots_[s] != -1) s = (s + 1) & mask;
    slots_[s] = static_cast<ElementId>(id);
  }
}

ElementId ElementTable::find(CodeView code) const {
  const std::uint64_t h = hash_code(code);
  const std::size_t mask = slots_.size() - 1;
  for (std::size_t s = h & mask;; s = (s + 1) & mask) {
    const ElementId id = slots_[s];
    if (id == -1) return -1;
    if (hashes_[id] == h) {
      const CodeView c = this->code(id);
      if (c.size() == code.size() && std::equal(c.begin(), c.end(), code.begin())) {
        return id;
      }
    }
  }
}

ElementId ElementTable::intern(CodeView code) {
  const std::uint64_t h = hash_code(code);
  const std::size_t mask = slots_.size() - 1;
  std::size_t s = h & mask;
  for (;; s = (s + 1) & mask) {
    const ElementId id = slots_[s];
    if (id == -1) break;
    if (hashes_[id] == h) {
      const CodeView c = this->code(id);
      if (c.size() == code.size() && std::equal(c.begin(), c.end(), code.begin())) {
        return id;
      }
    }
  }
  if (lengths_.size() >= max_elements_) {
    throw BudgetExceeded("element table exceeded " + std::to_string(max_elements_) +
                             " elements",
                         -1);
  }
  const auto id = static_cast<ElementId>(lengths_.size());
  pool_.insert(pool_.end(), code.begin(), code.end());
  offsets_.push_back(pool_.size());
  lengths_.push_back(group_.model().length(code));
  hashes_.push_back(h);
  slots_[s] = id;
  if (2 * lengths_.size() > slots_.size()) rehash(2 * slots_.size());
  return id;
}

Element ElementTable::element(ElementId id) const {
  const CodeView c = code(id);
  return Element(Code(c.begin(), c.end()));
}

NeighborCache::NeighborCache(ElementTable& table, std::vector<Element> steps,
                             Side side)
    : table_(table), steps_(std::move(steps)), side_(side) {}

ElementId NeighborCache::get(ElementId x, std::size_t j) {
  const std::size_t w = steps_.size();
  const std::size_t row = static_cast<std::size_t>(x) * w;
  if (row + w > cache_.size()) {
    cache_.resize(std::max(row + w, cache_.size() * 3 / 2), -1);
  }
  ElementId& slot = cache_[row + j];
  if (slot != -1) return slot;
  const auto& model = table_.group().model();
  if (side_ == Side::Right) {
    const CodeView c = table_.code(x);
    scratch_.assign(c.begin(), c.end());
    model.multiply(scratch_, steps_[j].view());
  } else {
    scratch_ = steps_[j].code();
    model.multiply(scratch_, table_.code(x));
  }
  slot = table_.intern(scratch_);
  return slot;
}

}  // namespace walkbounds

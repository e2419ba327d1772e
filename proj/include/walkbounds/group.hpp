#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace walkbounds {

using Code = std::vector<std::int32_t>;
using CodeView = std::span<const std::int32_t>;

std::size_t hash_code(CodeView code) noexcept;

/// Canonical normal form of a group element. The integer code is only
/// meaningful together with the Group that produced it.
class Element {
 public:
  Element() = default;
  explicit Element(Code code) : code_(std::move(code)) {}

  CodeView view() const noexcept { return code_; }
  const Code& code() const noexcept { return code_; }
  Code& mutable_code() noexcept { return code_; }
  bool empty() const noexcept { return code_.empty(); }

  friend bool operator==(const Element&, const Element&) = default;
  friend auto operator<=>(const Element&, const Element&) = default;

 private:
  Code code_;
};

struct ElementHash {
  std::size_t operator()(const Element& e) const noexcept {
    return hash_code(e.view());
  }
};

enum class GroupKind { Free, Cyclic, FreeProduct, FreeAbelian, DirectProduct };

/// Generating-set convention for direct products: `Union` moves one
/// coordinate per step, `Synchronized` moves every coordinate at once.
enum class ProductConvention { Union, Synchronized };

std::string to_string(GroupKind kind);
std::string to_string(ProductConvention convention);

/// Declarative description of a finitely generated group with a solvable
/// normal form.
struct GroupSpec {
  GroupKind kind = GroupKind::Free;
  int rank = 0;     // Free, FreeAbelian
  long order = 0;   // Cyclic; 0 encodes the infinite cyclic group
  // Cyclic only: generate by every element of the group (identity
  // included) instead of {b, b^-1}.
  bool full_generating_set = false;
  std::vector<GroupSpec> factors;  // FreeProduct, DirectProduct
  ProductConvention convention = ProductConvention::Union;
  std::vector<std::string> labels;         // one label per generator pair
  std::map<std::string, double> weights;  // label -> weight, default 1

  static GroupSpec free(int rank, std::vector<std::string> labels = {});
  static GroupSpec cyclic(long order, std::string label = "");
  static GroupSpec integers(std::string label = "");
  static GroupSpec free_product(std::vector<GroupSpec> factors);
  static GroupSpec free_abelian(int rank, std::vector<std::string> labels = {});
  static GroupSpec direct_product(std::vector<GroupSpec> factors,
                                  ProductConvention convention);
};

struct Generator {
  std::string label;  // display form, e.g. "a" or "a^-1"
  Element element;
  double weight = 1.0;
};

struct BallCensus {
  int radius = 0;
  std::vector<std::uint64_t> sphere_sizes;  // #S(e, n), n = 0..radius
  std::vector<std::uint64_t> ball_sizes;    // #B(e, n)
  bool truncated = false;                   // budget hit before `radius`
};

struct GrowthEstimate {
  double v_cesaro = 0.0;  // log #B(n) / n at the deepest radius
  double v_ratio = 0.0;   // mean of log #S(k)/#S(k-1) over the last ceil(n/2) radii
  double error = 0.0;     // |v_ratio(n) - v_ratio(n-2)|, empirical
  int depth = 0;
  bool subexponential = false;
};

namespace detail {
class GroupModel;
}

/// Immutable handle on a group model; cheap to copy.
class Group {
 public:
  explicit Group(const GroupSpec& spec);

  const GroupSpec& spec() const noexcept { return spec_; }

  Element identity() const;
  Element compose(const Element& x, const Element& y) const;
  /// x <- x * g, amortised O(|g|) for words.
  void compose_inplace(Element& x, const Element& g) const;
  Element inverse(const Element& x) const;
  double length(const Element& x) const;

  /// Throws InvalidInput when `x` is not a canonical form of this group.
  void validate(const Element& x) const;

  /// Symmetric generating set, inverse pairs adjacent.
  const std::vector<Generator>& generators() const noexcept;
  bool has_unit_weights() const noexcept;
  /// True when the Cayley graph with respect to generators() is a tree.
  bool is_tree() const noexcept;

  Element parse(std::string_view text) const;
  std::string format(const Element& x) const;

  /// Shortest walk lengths over the unit generating set with even / odd
  /// parity (infinity if impossible). Used for synchronized products.
  std::array<double, 2> parity_lengths(const Element& x) const;

  const detail::GroupModel& model() const noexcept { return *model_; }

 private:
  GroupSpec spec_;
  std::shared_ptr<const detail::GroupModel> model_;
};

/// Exact sphere/ball counts by breadth-first search over canonical forms.
/// Requires unit weights. Stops early (truncated = true) once the number
/// of visited elements would exceed `max_elements`.
BallCensus ball_census(const Group& group, int radius,
                       std::size_t max_elements = 50'000'000);

GrowthEstimate growth_estimate(const BallCensus& census);

}  // namespace walkbounds

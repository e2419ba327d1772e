#pragma once

#include <array>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "walkbounds/group.hpp"

namespace walkbounds::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class GroupModel {
 public:
  virtual ~GroupModel() = default;

  virtual Code identity() const = 0;
  // x <- x * g
  virtual void multiply(Code& x, CodeView g) const = 0;
  virtual Code inverse(CodeView x) const = 0;
  virtual double length(CodeView x) const = 0;
  virtual void validate(CodeView x) const = 0;
  virtual std::array<double, 2> parity_lengths(CodeView x) const = 0;
  virtual Code parse(std::string_view text) const = 0;
  virtual std::string format(CodeView x) const = 0;

  const std::vector<Generator>& generators() const noexcept { return gens_; }
  bool unit_weights() const noexcept { return unit_weights_; }
  bool tree() const noexcept { return tree_; }

 protected:
  std::vector<Generator> gens_;
  bool unit_weights_ = true;
  bool tree_ = false;
};

}  // namespace walkbounds::detail

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mfgp/kernel.hpp"

namespace mfgp {

/// Kernel composition such as "SE[SE]" or "SC[SC[SE]]". `families` runs from
/// the innermost kernel (level 1, on raw inputs) to the exposed kernel.
struct CompositionSpec {
  std::vector<KernelFamily> families;

  std::size_t depth() const { return families.size(); }
  KernelFamily outermost() const { return families.back(); }

  /// Parses the bracket notation; depth must be 2 or 3. Throws InputError
  /// naming the offending character position.
  static CompositionSpec parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const CompositionSpec&) const = default;
};

}  // namespace mfgp

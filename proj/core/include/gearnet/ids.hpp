#pragma once

#include <compare>
#include <cstddef>
#include <functional>

namespace gearnet {

/// Index-backed identifier, distinct per tag so shaft and element ids never mix.
template <class Tag>
struct Id {
  std::size_t value = 0;

  constexpr auto operator<=>(const Id&) const = default;
};

using ShaftId = Id<struct ShaftTag>;
using ElementId = Id<struct ElementTag>;

}  // namespace gearnet

template <class Tag>
struct std::hash<gearnet::Id<Tag>> {
  std::size_t operator()(const gearnet::Id<Tag>& id) const noexcept {
    return std::hash<std::size_t>{}(id.value);
  }
};

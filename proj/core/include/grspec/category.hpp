#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace grspec {

/// A constituent label: the major category symbol plus an optional
/// refinement used to split a few categories (e.g. `Num/card` vs `Num/hour`).
struct CategoryTag {
  std::string major;
  std::optional<std::string> refinement;

  CategoryTag() = default;
  explicit CategoryTag(std::string major_symbol,
                       std::optional<std::string> refine = std::nullopt)
      : major(std::move(major_symbol)), refinement(std::move(refine)) {}

  /// `Major` or `Major/refinement`.
  std::string str() const;
  /// Appends str() to `out`.
  void append_to(std::string& out) const;

  /// Inverse of str(). Throws std::invalid_argument on an empty major symbol.
  static CategoryTag parse(std::string_view text);

  friend bool operator==(const CategoryTag&, const CategoryTag&) = default;
  friend auto operator<=>(const CategoryTag&, const CategoryTag&) = default;
};

struct CategoryTagHash {
  std::size_t operator()(const CategoryTag& tag) const noexcept;
};

/// True for symbols made of [A-Za-z0-9_@.'-]+ and not empty.
bool is_symbol(std::string_view text);

}  // namespace grspec

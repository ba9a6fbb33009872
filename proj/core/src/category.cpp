#include "grspec/category.hpp"

#include <stdexcept>

namespace grspec {

std::string CategoryTag::str() const {
  if (!refinement) return major;
  return major + "/" + *refinement;
}

void CategoryTag::append_to(std::string& out) const {
  out += major;
  if (refinement) {
    out += '/';
    out += *refinement;
  }
}

CategoryTag CategoryTag::parse(std::string_view text) {
  const auto slash = text.find('/');
  std::string_view major = text.substr(0, slash);
  if (major.empty()) throw std::invalid_argument("empty category symbol in '" + std::string(text) + "'");
  if (slash == std::string_view::npos) return CategoryTag(std::string(major));
  std::string_view refine = text.substr(slash + 1);
  if (refine.empty()) throw std::invalid_argument("empty refinement in '" + std::string(text) + "'");
  return CategoryTag(std::string(major), std::string(refine));
}

std::size_t CategoryTagHash::operator()(const CategoryTag& tag) const noexcept {
  std::size_t h = std::hash<std::string>{}(tag.major);
  if (tag.refinement) h ^= std::hash<std::string>{}(*tag.refinement) * 0x9e3779b97f4a7c15ULL + 0x51;
  return h;
}

bool is_symbol(std::string_view text) {
  if (text.empty()) return false;
  for (char c : text) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '@' || c == '.' || c == '\'' || c == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace grspec

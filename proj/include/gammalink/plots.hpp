#pragma once

#include <string>

#include "gammalink/persistence.hpp"

namespace gammalink {

std::string svg_diagram(const Diagram& D, const std::string& title);
// band may be null
std::string svg_vineyard(const Vineyard& v, const Band* band, const std::string& title);

} // namespace gammalink

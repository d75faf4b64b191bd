#pragma once
// Deterministic SVG rendering of 2-D domains: box outlines, shaded tagged
// sets, optional per-cell potential heatmap (u = 0 black .. u = 1 white).
// Output is byte-stable: fixed float formatting, fixed element order, no
// timestamps.

#include <string>

#include "capacity.hpp"
#include "domain.hpp"

namespace caplab {

bool render_domain_svg(const DomainSpec& spec, const PotentialField* field,
                       std::string* out, std::string* err);

}  // namespace caplab

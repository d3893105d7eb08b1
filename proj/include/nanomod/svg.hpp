#pragma once

#include <string>

#include "nanomod/kinds.hpp"
#include "nanomod/route.hpp"

namespace nanomod {

/// SVG 1.1 drawing of a layout. `scale` is SVG units per micrometre; the y
/// axis points up. Components are oriented rectangles with a dot per pin,
/// every constant-width run of a wire is one polyline stroked at its width,
/// and bridges are drawn as small squares. Output bytes depend only on the
/// inputs. Throws ConfigError for a non-positive scale or an unknown kind.
std::string render_svg(const RoutedLayout& layout, const KindLibrary& kinds, double scale = 1.0);

}  // namespace nanomod

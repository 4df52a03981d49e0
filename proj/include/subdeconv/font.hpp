#pragma once

#include "subdeconv/model.hpp"

namespace subdeconv {

/// Binary raster of an upper-case letter from a built-in 5x7 dot-matrix font,
/// scaled up and centered on a size x size grid (row 0 is the top row).
/// Throws UnknownShape for characters outside A-Z.
Matrix render_letter(char letter, int size = 64);

}  // namespace subdeconv

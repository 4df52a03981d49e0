#include "subdeconv/font.hpp"

#include "subdeconv/error.hpp"

#include <array>
#include <cctype>
#include <cstdint>

namespace subdeconv {

namespace {

using Glyph = std::array<std::uint8_t, 7>;

// One byte per row, bit 4 is the leftmost dot.
constexpr std::array<Glyph, 26> kGlyphs = {{
    {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},  // A
    {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E},  // B
    {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E},  // C
    {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C},  // D
    {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F},  // E
    {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10},  // F
    {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F},  // G
    {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},  // H
    {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E},  // I
    {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C},  // J
    {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11},  // K
    {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F},  // L
    {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11},  // M
    {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11},  // N
    {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E},  // O
    {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10},  // P
    {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D},  // Q
    {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11},  // R
    {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E},  // S
    {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},  // T
    {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E},  // U
    {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04},  // V
    {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A},  // W
    {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11},  // X
    {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04},  // Y
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F},  // Z
}};

}  // namespace

Matrix render_letter(char letter, int size) {
  const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(letter)));
  if (up < 'A' || up > 'Z') fail(ErrorCode::UnknownShape, std::string("no glyph for '") + letter + "'");
  const int scale = size / 8;
  if (scale < 1) fail(ErrorCode::InvalidArgument, "letter grid must be at least 8x8");
  const Glyph& glyph = kGlyphs[up - 'A'];
  const int row0 = (size - 7 * scale) / 2;
  const int col0 = (size - 5 * scale) / 2;
  Matrix grid = Matrix::Zero(size, size);
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 5; ++c)
      if (glyph[r] & (0x10 >> c)) grid.block(row0 + r * scale, col0 + c * scale, scale, scale).setOnes();
  return grid;
}

}  // namespace subdeconv

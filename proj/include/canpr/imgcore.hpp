#pragma once

#include <array>
#include <filesystem>

#include "canpr/image.hpp"

namespace canpr {

// Colour conversion (sRGB, D65).

/// sRGB triple in [0,1] to unit-scaled Lab (see LabImage).
std::array<double, 3> srgb_to_lab(const std::array<double, 3>& rgb) noexcept;
/// Inverse of srgb_to_lab, clamped to [0,1].
std::array<double, 3> lab_to_srgb(const std::array<double, 3>& lab) noexcept;

LabImage rgb_to_lab(const ImageF& img);
ImageF lab_to_rgb(const LabImage& lab);

// Windowed raster operations. Windows clipped by the image border are
// renormalized by the number of samples that remain.

/// Mean over the (2r+1)^2 window, computed from a summed-area table.
ImageF box_filter(const ImageF& img, int radius);

/// Area-weighted downsampling (exact fractional pixel overlaps).
ImageF resize_area(const ImageF& img, int width, int height);
/// Bilinear resampling with pixel-centre alignment and edge clamping.
ImageF resize_bilinear(const ImageF& img, int width, int height);

ImageF flip_horizontal(const ImageF& img);

// File I/O. PNG is 8-bit only; masks use binary PGM (P5).

ImageF load_png(const std::filesystem::path& path);
void save_png(const ImageF& img, const std::filesystem::path& path);

void save_pgm(const BinaryMask& mask, const std::filesystem::path& path);
/// Writes a single-channel image as 8-bit PGM, round(v*255) after clamping.
void save_pgm(const ImageF& gray, const std::filesystem::path& path);
BinaryMask load_pgm_mask(const std::filesystem::path& path);

/// round(clamp(v)*255).
std::uint8_t to_byte(double v) noexcept;

}  // namespace canpr

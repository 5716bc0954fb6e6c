#include <algorithm>
#include <cmath>

#include "canpr/error.hpp"
#include "canpr/imgcore.hpp"

namespace canpr {

namespace {

// linear sRGB -> XYZ, D65.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kXyzToRgb[3][3] = {
    {3.2404548360214087, -1.5371388501025751, -0.498531546868481},
    {-0.9692663898756538, 1.876010928842491, 0.04155608234667355},
    {0.05564341960421367, -0.20402585426769818, 1.057225162457929},
};
// White point taken as the image of RGB (1,1,1) so that white is exactly neutral.
constexpr double kWhite[3] = {
    kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
    kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
    kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2],
};

constexpr double kDelta = 6.0 / 29.0;

double srgb_decode(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double srgb_encode(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
  return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

}  // namespace

std::array<double, 3> srgb_to_lab(const std::array<double, 3>& rgb) noexcept {
  double lin[3];
  for (int i = 0; i < 3; ++i) lin[i] = srgb_decode(rgb[i]);
  double f[3];
  for (int r = 0; r < 3; ++r) {
    double xyz = kRgbToXyz[r][0] * lin[0] + kRgbToXyz[r][1] * lin[1] + kRgbToXyz[r][2] * lin[2];
    f[r] = lab_f(xyz / kWhite[r]);
  }
  const double L = 116.0 * f[1] - 16.0;
  const double a = 500.0 * (f[0] - f[1]);
  const double b = 200.0 * (f[1] - f[2]);
  return {L / 100.0, (a + 128.0) / 255.0, (b + 128.0) / 255.0};
}

std::array<double, 3> lab_to_srgb(const std::array<double, 3>& lab) noexcept {
  const double L = lab[0] * 100.0;
  const double a = lab[1] * 255.0 - 128.0;
  const double b = lab[2] * 255.0 - 128.0;
  const double fy = (L + 16.0) / 116.0;
  const double fx = fy + a / 500.0;
  const double fz = fy - b / 200.0;
  const double xyz[3] = {kWhite[0] * lab_f_inv(fx), kWhite[1] * lab_f_inv(fy),
                         kWhite[2] * lab_f_inv(fz)};
  std::array<double, 3> out{};
  for (int r = 0; r < 3; ++r) {
    double lin = kXyzToRgb[r][0] * xyz[0] + kXyzToRgb[r][1] * xyz[1] + kXyzToRgb[r][2] * xyz[2];
    out[r] = std::clamp(srgb_encode(std::clamp(lin, 0.0, 1.0)), 0.0, 1.0);
  }
  return out;
}

LabImage rgb_to_lab(const ImageF& img) {
  if (img.channels() != 3) throw_invalid("rgb_to_lab expects 3 channels");
  ImageF out(img.width(), img.height(), 3);
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  auto L = out.plane(0), A = out.plane(1), B = out.plane(2);
  for (std::size_t i = 0; i < img.plane_size(); ++i) {
    auto lab = srgb_to_lab({r[i], g[i], b[i]});
    L[i] = lab[0];
    A[i] = lab[1];
    B[i] = lab[2];
  }
  return LabImage(std::move(out));
}

ImageF lab_to_rgb(const LabImage& lab) {
  ImageF out(lab.width(), lab.height(), 3);
  auto L = lab.L(), A = lab.a(), B = lab.b();
  auto r = out.plane(0), g = out.plane(1), b = out.plane(2);
  for (std::size_t i = 0; i < r.size(); ++i) {
    auto rgb = lab_to_srgb({L[i], A[i], B[i]});
    r[i] = rgb[0];
    g[i] = rgb[1];
    b[i] = rgb[2];
  }
  return out;
}

}  // namespace canpr

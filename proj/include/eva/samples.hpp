#pragma once

#include <cstdint>
#include <string>

#include "eva/program.hpp"

namespace eva::samples {

/// x^2 * y^3 built as (x*x) * ((y*y)*y). Node ids: x=0, y=1, x*x=2, y*y=3,
/// y^3=4, output product=5.
Program x2y3(double x_scale = 60, double y_scale = 30, double out_scale = 30,
             std::uint64_t vec_size = 8);

/// x^2 + x. Node ids: x=0, x*x=1, sum=2.
Program x2_plus_x(double x_scale = 30, double out_scale = 30, std::uint64_t vec_size = 8);

/// x^2 + (x + x). Node ids: x=0, x*x=1, x+x=2, sum=3.
Program x2_plus_2x(double x_scale = 60, double out_scale = 30, std::uint64_t vec_size = 8);

/// x^2 + y^3 built as (x*x) + ((y*y)*y).
Program x2_plus_y3(double x_scale = 60, double y_scale = 30, double out_scale = 30,
                   std::uint64_t vec_size = 8);

/// v_0 = x, v_{i+1} = v_i * x, output v_n.
Program multiply_chain(std::size_t n, double scale = 30, std::uint64_t vec_size = 8);

/// Sobel edge detection on a width x width image packed row-major into one
/// cipher input: 3x3 gradient filters via left rotations by i*width+j, then a
/// cubic approximation of the square root of Ix^2 + Iy^2.
Program sobel(std::uint64_t width = 64, double scale = 30);

/// Coefficients of the square-root approximation used by sobel().
inline constexpr double kSqrtC1 = 2.214;
inline constexpr double kSqrtC2 = -1.098;
inline constexpr double kSqrtC3 = 0.173;

}  // namespace eva::samples

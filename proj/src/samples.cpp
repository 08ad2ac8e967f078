#include "eva/samples.hpp"

#include <array>

namespace eva::samples {

Program x2y3(double x_scale, double y_scale, double out_scale, std::uint64_t vec_size) {
  Program p(vec_size);
  const NodeId x = p.add_input(ValueType::Cipher, x_scale);
  const NodeId y = p.add_input(ValueType::Cipher, y_scale);
  const NodeId xx = p.add_instruction(OpCode::Multiply, {x, x});
  const NodeId yy = p.add_instruction(OpCode::Multiply, {y, y});
  const NodeId yyy = p.add_instruction(OpCode::Multiply, {yy, y});
  const NodeId out = p.add_instruction(OpCode::Multiply, {xx, yyy});
  p.add_output(out, out_scale);
  return p;
}

Program x2_plus_x(double x_scale, double out_scale, std::uint64_t vec_size) {
  Program p(vec_size);
  const NodeId x = p.add_input(ValueType::Cipher, x_scale);
  const NodeId xx = p.add_instruction(OpCode::Multiply, {x, x});
  const NodeId out = p.add_instruction(OpCode::Add, {xx, x});
  p.add_output(out, out_scale);
  return p;
}

Program x2_plus_2x(double x_scale, double out_scale, std::uint64_t vec_size) {
  Program p(vec_size);
  const NodeId x = p.add_input(ValueType::Cipher, x_scale);
  const NodeId xx = p.add_instruction(OpCode::Multiply, {x, x});
  const NodeId twice = p.add_instruction(OpCode::Add, {x, x});
  const NodeId out = p.add_instruction(OpCode::Add, {xx, twice});
  p.add_output(out, out_scale);
  return p;
}

Program x2_plus_y3(double x_scale, double y_scale, double out_scale, std::uint64_t vec_size) {
  Program p(vec_size);
  const NodeId x = p.add_input(ValueType::Cipher, x_scale);
  const NodeId y = p.add_input(ValueType::Cipher, y_scale);
  const NodeId xx = p.add_instruction(OpCode::Multiply, {x, x});
  const NodeId yy = p.add_instruction(OpCode::Multiply, {y, y});
  const NodeId yyy = p.add_instruction(OpCode::Multiply, {yy, y});
  const NodeId out = p.add_instruction(OpCode::Add, {xx, yyy});
  p.add_output(out, out_scale);
  return p;
}

Program multiply_chain(std::size_t n, double scale, std::uint64_t vec_size) {
  Program p(vec_size);
  const NodeId x = p.add_input(ValueType::Cipher, scale);
  NodeId v = x;
  for (std::size_t i = 0; i < n; ++i) v = p.add_instruction(OpCode::Multiply, {v, x});
  p.add_output(v, scale);
  return p;
}

Program sobel(std::uint64_t width, double scale) {
  Program p(width * width);
  constexpr std::array<std::array<double, 3>, 3> f{{{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}}};
  const NodeId image = p.add_input(ValueType::Cipher, scale);
  NodeId ix = 0;
  NodeId iy = 0;
  for (std::uint64_t i = 0; i < 3; ++i) {
    for (std::uint64_t j = 0; j < 3; ++j) {
      const NodeId step =
          p.add_constant(ValueType::Integer, {static_cast<double>(i * width + j)}, 0);
      const NodeId rot = p.add_instruction(OpCode::RotateLeft, {image, step});
      const NodeId fh = p.add_constant(ValueType::Scalar, {f[i][j]}, scale);
      const NodeId fv = p.add_constant(ValueType::Scalar, {f[j][i]}, scale);
      const NodeId h = p.add_instruction(OpCode::Multiply, {rot, fh});
      const NodeId v = p.add_instruction(OpCode::Multiply, {rot, fv});
      const bool first = i == 0 && j == 0;
      ix = first ? h : p.add_instruction(OpCode::Add, {ix, h});
      iy = first ? v : p.add_instruction(OpCode::Add, {iy, v});
    }
  }
  const NodeId ix2 = p.add_instruction(OpCode::Multiply, {ix, ix});
  const NodeId iy2 = p.add_instruction(OpCode::Multiply, {iy, iy});
  const NodeId s = p.add_instruction(OpCode::Add, {ix2, iy2});
  const NodeId c1 = p.add_constant(ValueType::Scalar, {kSqrtC1}, scale);
  const NodeId c2 = p.add_constant(ValueType::Scalar, {kSqrtC2}, scale);
  const NodeId c3 = p.add_constant(ValueType::Scalar, {kSqrtC3}, scale);
  const NodeId s2 = p.add_instruction(OpCode::Multiply, {s, s});
  const NodeId s3 = p.add_instruction(OpCode::Multiply, {s2, s});
  const NodeId t1 = p.add_instruction(OpCode::Multiply, {s, c1});
  const NodeId t2 = p.add_instruction(OpCode::Multiply, {s2, c2});
  const NodeId t3 = p.add_instruction(OpCode::Multiply, {s3, c3});
  const NodeId sum = p.add_instruction(OpCode::Add, {p.add_instruction(OpCode::Add, {t1, t2}), t3});
  p.add_output(sum, scale);
  return p;
}

}  // namespace eva::samples

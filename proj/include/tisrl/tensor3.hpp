#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>

#include "tisrl/errors.hpp"

namespace tisrl {

/// Dense third-order tensor of size n1 x n2 x n3.
///
/// Storage is slice-major: the n3 frontal slices A(:,:,k) sit side by side in
/// one column-major n1 x (n2*n3) matrix, so slice(k) is a contiguous block.
/// Indices are zero-based throughout.
template <typename Coeff>
class DenseTensor3 {
 public:
  using Scalar = Coeff;
  using Matrix = Eigen::Matrix<Coeff, Eigen::Dynamic, Eigen::Dynamic>;
  using SliceRef = Eigen::Block<Matrix, Eigen::Dynamic, Eigen::Dynamic, true>;
  using ConstSliceRef =
      Eigen::Block<const Matrix, Eigen::Dynamic, Eigen::Dynamic, true>;

  DenseTensor3(Eigen::Index n1, Eigen::Index n2, Eigen::Index n3)
      : n1_(n1), n2_(n2), n3_(n3) {
    if (n1 < 1 || n2 < 1 || n3 < 1) {
      throw ShapeError("tensor dimensions must be positive, got " +
                       dims_string(n1, n2, n3));
    }
    data_ = Matrix::Zero(n1, n2 * n3);
  }

  static DenseTensor3 Zero(Eigen::Index n1, Eigen::Index n2, Eigen::Index n3) {
    return DenseTensor3(n1, n2, n3);
  }

  /// First frontal slice is the identity, the rest are zero.
  static DenseTensor3 Identity(Eigen::Index n, Eigen::Index n3) {
    DenseTensor3 t(n, n, n3);
    t.slice(0).setIdentity();
    return t;
  }

  static DenseTensor3 Random(Eigen::Index n1, Eigen::Index n2,
                             Eigen::Index n3) {
    DenseTensor3 t(n1, n2, n3);
    t.data_.setRandom();
    return t;
  }

  Eigen::Index rows() const { return n1_; }
  Eigen::Index cols() const { return n2_; }
  Eigen::Index depth() const { return n3_; }
  Eigen::Index size() const { return n1_ * n2_ * n3_; }

  bool same_dims(const DenseTensor3& other) const {
    return n1_ == other.n1_ && n2_ == other.n2_ && n3_ == other.n3_;
  }

  Coeff& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) {
    return data_(i, k * n2_ + j);
  }
  const Coeff& operator()(Eigen::Index i, Eigen::Index j,
                          Eigen::Index k) const {
    return data_(i, k * n2_ + j);
  }

  SliceRef slice(Eigen::Index k) { return data_.middleCols(k * n2_, n2_); }
  ConstSliceRef slice(Eigen::Index k) const {
    return data_.middleCols(k * n2_, n2_);
  }

  /// All slices side by side, n1 x (n2*n3).
  const Matrix& flat() const { return data_; }
  Matrix& flat() { return data_; }

  auto norm() const { return data_.norm(); }
  /// Largest absolute entry.
  auto max_abs() const { return data_.cwiseAbs().maxCoeff(); }

  DenseTensor3& operator+=(const DenseTensor3& rhs) {
    require_same(rhs, "+=");
    data_ += rhs.data_;
    return *this;
  }
  DenseTensor3& operator-=(const DenseTensor3& rhs) {
    require_same(rhs, "-=");
    data_ -= rhs.data_;
    return *this;
  }
  template <typename S>
  DenseTensor3& operator*=(const S& s) {
    data_ *= Coeff(s);
    return *this;
  }

  friend DenseTensor3 operator+(DenseTensor3 lhs, const DenseTensor3& rhs) {
    return lhs += rhs;
  }
  friend DenseTensor3 operator-(DenseTensor3 lhs, const DenseTensor3& rhs) {
    return lhs -= rhs;
  }
  template <typename S>
  friend DenseTensor3 operator*(DenseTensor3 lhs, const S& s) {
    return lhs *= s;
  }
  template <typename S>
  friend DenseTensor3 operator*(const S& s, DenseTensor3 rhs) {
    return rhs *= s;
  }

  bool operator==(const DenseTensor3& other) const {
    return same_dims(other) && data_ == other.data_;
  }

  std::string dims_string() const { return dims_string(n1_, n2_, n3_); }

 private:
  static std::string dims_string(Eigen::Index a, Eigen::Index b,
                                 Eigen::Index c) {
    return std::to_string(a) + "x" + std::to_string(b) + "x" +
           std::to_string(c);
  }

  void require_same(const DenseTensor3& rhs, const char* op) const {
    if (!same_dims(rhs)) {
      throw ShapeError(std::string("tensor ") + op + ": " + dims_string() +
                       " vs " + rhs.dims_string());
    }
  }

  Eigen::Index n1_, n2_, n3_;
  Matrix data_;
};

template <typename Scalar>
using Tensor3 = DenseTensor3<Scalar>;

/// Mode-3 Fourier transform of a real tensor.
template <typename Scalar>
using FreqTensor3 = DenseTensor3<std::complex<Scalar>>;

using Tensor3d = Tensor3<double>;
using Tensor3f = Tensor3<float>;
using FreqTensor3d = FreqTensor3<double>;

}  // namespace tisrl

#pragma once

// t-product algebra on third-order tensors: block unfoldings, the mode-3
// Fourier transform, t-product, t-SVD, the tubal nuclear norm and its
// proximal map. Everything is templated on the real scalar type.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tisrl/errors.hpp"
#include "tisrl/parallel.hpp"
#include "tisrl/tensor3.hpp"

namespace tisrl {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct TSvdFactors {
  Tensor3<Scalar> U;  // n1 x n1 x n3, orthogonal
  Tensor3<Scalar> S;  // n1 x n2 x n3, f-diagonal
  Tensor3<Scalar> V;  // n2 x n2 x n3, orthogonal
};

namespace detail {

/// Frequencies 0..n3/2 are decomposed explicitly; the others are conjugate
/// mirrors of these.
inline Eigen::Index independent_frequencies(Eigen::Index n3) {
  return n3 / 2 + 1;
}

/// Frequency k equals its own mirror (k = 0, and k = n3/2 for even n3).
inline bool self_conjugate(Eigen::Index k, Eigen::Index n3) {
  return k == 0 || 2 * k == n3;
}

template <typename Scalar>
Scalar symmetry_tolerance() {
  return Scalar(1e4) * std::numeric_limits<Scalar>::epsilon();
}

/// Fills slice n3-k with conj(slice k) for every mirrored frequency.
template <typename Scalar>
void mirror_spectrum(FreqTensor3<Scalar>& af) {
  const Eigen::Index n3 = af.depth();
  for (Eigen::Index k = 1; k < independent_frequencies(n3); ++k) {
    if (!self_conjugate(k, n3)) af.slice(n3 - k) = af.slice(k).conjugate();
  }
}

template <typename Scalar>
MatrixX<std::complex<Scalar>> to_complex(const MatrixX<Scalar>& m) {
  return m.template cast<std::complex<Scalar>>();
}

}  // namespace detail

/// Stacks the frontal slices top to bottom: (n1*n3) x n2.
template <typename Scalar>
MatrixX<Scalar> unfold(const Tensor3<Scalar>& a) {
  const Eigen::Index n1 = a.rows(), n3 = a.depth();
  MatrixX<Scalar> out(n1 * n3, a.cols());
  for (Eigen::Index k = 0; k < n3; ++k) out.middleRows(k * n1, n1) = a.slice(k);
  return out;
}

/// Inverse of unfold.
template <typename Derived>
Tensor3<typename Derived::Scalar> fold(const Eigen::MatrixBase<Derived>& m,
                                       Eigen::Index n1, Eigen::Index n2,
                                       Eigen::Index n3) {
  if (m.rows() != n1 * n3 || m.cols() != n2) {
    throw ShapeError("fold: matrix is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", expected " +
                     std::to_string(n1 * n3) + "x" + std::to_string(n2));
  }
  Tensor3<typename Derived::Scalar> out(n1, n2, n3);
  for (Eigen::Index k = 0; k < n3; ++k) out.slice(k) = m.middleRows(k * n1, n1);
  return out;
}

template <typename Scalar>
MatrixX<Scalar> bdiag(const Tensor3<Scalar>& a) {
  const Eigen::Index n1 = a.rows(), n2 = a.cols(), n3 = a.depth();
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(n1 * n3, n2 * n3);
  for (Eigen::Index k = 0; k < n3; ++k)
    out.block(k * n1, k * n2, n1, n2) = a.slice(k);
  return out;
}

/// Block-circulant matrix: block (r, c) holds slice (r - c) mod n3.
template <typename Scalar>
MatrixX<Scalar> bcirc(const Tensor3<Scalar>& a) {
  const Eigen::Index n1 = a.rows(), n2 = a.cols(), n3 = a.depth();
  MatrixX<Scalar> out(n1 * n3, n2 * n3);
  for (Eigen::Index r = 0; r < n3; ++r)
    for (Eigen::Index c = 0; c < n3; ++c)
      out.block(r * n1, c * n2, n1, n2) = a.slice(((r - c) % n3 + n3) % n3);
  return out;
}

/// Length-n3 DFT of every tube A(i, j, :), unnormalized forward transform.
template <typename Scalar>
FreqTensor3<Scalar> fft_mode3(const Tensor3<Scalar>& a) {
  const Eigen::Index n1 = a.rows(), n2 = a.cols(), n3 = a.depth();
  FreqTensor3<Scalar> out(n1, n2, n3);
  // The length-1 DFT is the identity (and kissfft cannot plan it).
  if (n3 == 1) {
    out.flat() = a.flat().template cast<std::complex<Scalar>>();
    return out;
  }
  Eigen::FFT<Scalar> fft;
  std::vector<Scalar> tube(static_cast<std::size_t>(n3));
  std::vector<std::complex<Scalar>> spectrum;
  for (Eigen::Index j = 0; j < n2; ++j) {
    for (Eigen::Index i = 0; i < n1; ++i) {
      for (Eigen::Index k = 0; k < n3; ++k) tube[k] = a(i, j, k);
      fft.fwd(spectrum, tube);
      for (Eigen::Index k = 0; k < n3; ++k) out(i, j, k) = spectrum[k];
    }
  }
  return out;
}

/// Inverse of fft_mode3. Throws SymmetryError when af is not conjugate
/// symmetric along mode 3 (it then has no real preimage). The imaginary
/// residue left by rounding is dropped; its largest magnitude is written to
/// max_imag when requested.
template <typename Scalar>
Tensor3<Scalar> ifft_mode3(const FreqTensor3<Scalar>& af,
                           Scalar* max_imag = nullptr) {
  const Eigen::Index n1 = af.rows(), n2 = af.cols(), n3 = af.depth();
  const Scalar scale = af.max_abs();
  Scalar violation = 0;
  for (Eigen::Index k = 0; k < detail::independent_frequencies(n3); ++k) {
    const Eigen::Index mirror = (n3 - k) % n3;
    violation = std::max<Scalar>(
        violation,
        (af.slice(k) - af.slice(mirror).conjugate()).cwiseAbs().maxCoeff());
  }
  if (violation > detail::symmetry_tolerance<Scalar>() * scale) {
    throw SymmetryError("ifft_mode3: spectrum violates conjugate symmetry by " +
                        std::to_string(violation) + " (scale " +
                        std::to_string(scale) + ")");
  }

  Tensor3<Scalar> out(n1, n2, n3);
  Scalar imag = 0;
  if (n3 == 1) {
    out.flat() = af.flat().real();
    if (max_imag) *max_imag = af.flat().imag().cwiseAbs().maxCoeff();
    return out;
  }
  Eigen::FFT<Scalar> fft;
  std::vector<std::complex<Scalar>> tube(static_cast<std::size_t>(n3));
  std::vector<std::complex<Scalar>> signal;
  for (Eigen::Index j = 0; j < n2; ++j) {
    for (Eigen::Index i = 0; i < n1; ++i) {
      for (Eigen::Index k = 0; k < n3; ++k) tube[k] = af(i, j, k);
      fft.inv(signal, tube);
      for (Eigen::Index k = 0; k < n3; ++k) {
        out(i, j, k) = signal[k].real();
        imag = std::max(imag, std::abs(signal[k].imag()));
      }
    }
  }
  if (max_imag) *max_imag = imag;
  return out;
}

/// Slices 1..n3-1 transposed and taken in reverse order; slice 0 transposed.
template <typename Scalar>
Tensor3<Scalar> tensor_transpose(const Tensor3<Scalar>& a) {
  const Eigen::Index n3 = a.depth();
  Tensor3<Scalar> out(a.cols(), a.rows(), n3);
  for (Eigen::Index k = 0; k < n3; ++k)
    out.slice(k) = a.slice((n3 - k) % n3).transpose();
  return out;
}

/// A * B = fold(bcirc(A) unfold(B)), evaluated as one matrix product per
/// frequency slice.
template <typename Scalar>
Tensor3<Scalar> t_product(const Tensor3<Scalar>& a, const Tensor3<Scalar>& b) {
  if (a.cols() != b.rows() || a.depth() != b.depth()) {
    throw ShapeError("t_product: " + a.dims_string() + " * " +
                     b.dims_string());
  }
  const Eigen::Index n3 = a.depth();
  const FreqTensor3<Scalar> af = fft_mode3(a);
  const FreqTensor3<Scalar> bf = fft_mode3(b);
  FreqTensor3<Scalar> cf(a.rows(), b.cols(), n3);
  parallel_for(detail::independent_frequencies(n3), [&](std::size_t k) {
    const auto kk = static_cast<Eigen::Index>(k);
    cf.slice(kk).noalias() = af.slice(kk) * bf.slice(kk);
  });
  detail::mirror_spectrum(cf);
  return ifft_mode3(cf);
}

/// A = U * S * V^T with orthogonal U, V and f-diagonal S. Frequency slices
/// of S carry nonnegative, non-increasing singular values.
template <typename Scalar>
TSvdFactors<Scalar> t_svd(const Tensor3<Scalar>& a) {
  using Complex = std::complex<Scalar>;
  using ComplexMatrix = MatrixX<Complex>;
  const Eigen::Index n1 = a.rows(), n2 = a.cols(), n3 = a.depth();
  const Eigen::Index p = std::min(n1, n2);
  const FreqTensor3<Scalar> af = fft_mode3(a);
  FreqTensor3<Scalar> uf(n1, n1, n3), sf(n1, n2, n3), vf(n2, n2, n3);

  parallel_for(detail::independent_frequencies(n3), [&](std::size_t k) {
    const auto kk = static_cast<Eigen::Index>(k);
    ComplexMatrix u, v;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sigma;
    if (detail::self_conjugate(kk, n3)) {
      // Real slice: a real SVD keeps the factors real, so their inverse
      // transform stays real as well.
      const MatrixX<Scalar> slice = af.slice(kk).real();
      Eigen::JacobiSVD<MatrixX<Scalar>> svd(
          slice, Eigen::ComputeFullU | Eigen::ComputeFullV);
      u = detail::to_complex<Scalar>(svd.matrixU());
      v = detail::to_complex<Scalar>(svd.matrixV());
      sigma = svd.singularValues();
    } else {
      const ComplexMatrix slice = af.slice(kk);
      Eigen::JacobiSVD<ComplexMatrix> svd(
          slice, Eigen::ComputeFullU | Eigen::ComputeFullV);
      u = svd.matrixU();
      v = svd.matrixV();
      sigma = svd.singularValues();
    }
    uf.slice(kk) = u;
    vf.slice(kk) = v;
    for (Eigen::Index i = 0; i < p; ++i) sf(i, i, kk) = sigma(i);
  });
  detail::mirror_spectrum(uf);
  detail::mirror_spectrum(sf);
  detail::mirror_spectrum(vf);
  return {ifft_mode3(uf), ifft_mode3(sf), ifft_mode3(vf)};
}

/// Sum of the singular values of every frequency slice.
template <typename Scalar>
Scalar tnn(const Tensor3<Scalar>& a) {
  using ComplexMatrix = MatrixX<std::complex<Scalar>>;
  const Eigen::Index n3 = a.depth();
  const FreqTensor3<Scalar> af = fft_mode3(a);
  const Eigen::Index half = detail::independent_frequencies(n3);
  std::vector<Scalar> per_slice(static_cast<std::size_t>(half), Scalar(0));
  parallel_for(per_slice.size(), [&](std::size_t k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const ComplexMatrix slice = af.slice(kk);
    Eigen::JacobiSVD<ComplexMatrix> svd(slice);
    const Scalar weight = detail::self_conjugate(kk, n3) ? 1 : 2;
    per_slice[k] = weight * svd.singularValues().sum();
  });
  Scalar total = 0;
  for (Scalar s : per_slice) total += s;
  return total;
}

/// Proximal map of the tubal nuclear norm:
///   argmin_Q ||Q||_tnn + 1/(2 tau) ||Q - M||_F^2.
/// Every frequency-domain singular value sigma becomes max(sigma - n3*tau, 0).
/// The n3 factor comes from Parseval under the unnormalized DFT.
template <typename Scalar>
Tensor3<Scalar> tnn_prox(const Tensor3<Scalar>& m, Scalar tau,
                         Scalar* max_imag = nullptr) {
  using Complex = std::complex<Scalar>;
  using ComplexMatrix = MatrixX<Complex>;
  if (!(tau > 0)) {
    throw ParameterError("tnn_prox: tau must be positive, got " +
                         std::to_string(tau));
  }
  const Eigen::Index n3 = m.depth();
  const Scalar theta = Scalar(n3) * tau;
  FreqTensor3<Scalar> mf = fft_mode3(m);

  parallel_for(detail::independent_frequencies(n3), [&](std::size_t k) {
    const auto kk = static_cast<Eigen::Index>(k);
    if (detail::self_conjugate(kk, n3)) {
      const MatrixX<Scalar> slice = mf.slice(kk).real();
      Eigen::JacobiSVD<MatrixX<Scalar>> svd(
          slice, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto shrunk =
          (svd.singularValues().array() - theta).max(Scalar(0)).matrix();
      const MatrixX<Scalar> q =
          svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
      mf.slice(kk) = detail::to_complex<Scalar>(q);
    } else {
      const ComplexMatrix slice = mf.slice(kk);
      Eigen::JacobiSVD<ComplexMatrix> svd(
          slice, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::Matrix<Complex, Eigen::Dynamic, 1> shrunk =
          (svd.singularValues().array() - theta)
              .max(Scalar(0))
              .matrix()
              .template cast<Complex>();
      mf.slice(kk) =
          svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().adjoint();
    }
  });
  detail::mirror_spectrum(mf);
  return ifft_mode3(mf, max_imag);
}

/// Builds the n x v x n tensor R(a, i, b) = C_i(a, b) from v square n x n
/// matrices: the stack of C_i as frontal slices, rotated so the view index
/// becomes the second mode.
template <typename Scalar>
Tensor3<Scalar> construct_phi(std::span<const MatrixX<Scalar>> views) {
  if (views.empty()) throw ShapeError("construct_phi: no views");
  const Eigen::Index n = views.front().rows();
  const auto v = static_cast<Eigen::Index>(views.size());
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (views[i].rows() != n || views[i].cols() != n) {
      throw ShapeError("construct_phi: view " + std::to_string(i) + " is " +
                       std::to_string(views[i].rows()) + "x" +
                       std::to_string(views[i].cols()) + ", expected " +
                       std::to_string(n) + "x" + std::to_string(n));
    }
  }
  Tensor3<Scalar> out(n, v, n);
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index i = 0; i < v; ++i) out.slice(b).col(i) = views[i].col(b);
  return out;
}

template <typename Scalar>
Tensor3<Scalar> construct_phi(const std::vector<MatrixX<Scalar>>& views) {
  return construct_phi(std::span<const MatrixX<Scalar>>(views));
}

/// Recovers the view matrices from construct_phi's layout.
template <typename Scalar>
std::vector<MatrixX<Scalar>> phi_inverse(const Tensor3<Scalar>& r) {
  const Eigen::Index n = r.rows();
  if (r.depth() != n) {
    throw ShapeError("phi_inverse: expected n x v x n, got " + r.dims_string());
  }
  std::vector<MatrixX<Scalar>> views(static_cast<std::size_t>(r.cols()),
                                     MatrixX<Scalar>(n, n));
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index i = 0; i < r.cols(); ++i)
      views[i].col(b) = r.slice(b).col(i);
  return views;
}

/// Single view of phi_inverse without materializing the others.
template <typename Scalar>
MatrixX<Scalar> phi_view(const Tensor3<Scalar>& r, Eigen::Index view) {
  const Eigen::Index n = r.rows();
  MatrixX<Scalar> out(n, n);
  for (Eigen::Index b = 0; b < n; ++b) out.col(b) = r.slice(b).col(view);
  return out;
}

}  // namespace tisrl

#pragma once

// Unitary DFT/IDFT, the row-selected partial Fourier sensing operators used
// by the range and velocity reconstructions, and the 2D periodogram.

#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "ncsense/channel.hpp"
#include "ncsense/errors.hpp"
#include "ncsense/linalg.hpp"
#include "ncsense/occupancy.hpp"

namespace ncsense {

namespace detail {

inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine = [] {
    Eigen::FFT<double> e;
    e.SetFlag(Eigen::FFT<double>::Unscaled);
    return e;
  }();
  return engine;
}

}  // namespace detail

// X[k] = N^{-1/2} sum_n x[n] exp(-j 2 pi n k / N)
// Length 0 and 1 are identities; kissfft mishandles a single point.
inline CVector dft(const CVector& v) {
  if (v.size() <= 1) return v;
  CVector out(v.size());
  detail::fft_engine().fwd(out, v);
  out /= std::sqrt(static_cast<double>(v.size()));
  return out;
}

// x[n] = N^{-1/2} sum_k X[k] exp(+j 2 pi n k / N)
inline CVector idft(const CVector& v) {
  if (v.size() <= 1) return v;
  CVector out(v.size());
  detail::fft_engine().inv(out, v);
  out /= std::sqrt(static_cast<double>(v.size()));
  return out;
}

enum class FourierDirection { Forward, Inverse };

class FourierOperator {
 public:
  FourierOperator(int size, FourierDirection direction) : size_(size), direction_(direction) {
    if (size <= 0) throw DimensionError("fourier operator size must be positive");
  }

  int size() const { return size_; }
  FourierDirection direction() const { return direction_; }

  CVector apply(const CVector& v) const {
    check(v);
    return direction_ == FourierDirection::Forward ? dft(v) : idft(v);
  }

  CVector apply_adjoint(const CVector& v) const {
    check(v);
    return direction_ == FourierDirection::Forward ? idft(v) : dft(v);
  }

 private:
  void check(const CVector& v) const {
    if (v.size() != size_) {
      throw DimensionError("fourier operator of size " + std::to_string(size_) +
                           " applied to vector of length " + std::to_string(v.size()));
    }
  }

  int size_;
  FourierDirection direction_;
};

// Rows `rows` of a masked unitary Fourier matrix: forward(x) gathers the
// selected entries of base(x), adjoint(y) scatters y and applies base^H.
// Entries outside the mask are exactly the rows the selection drops, so the
// Hadamard masking never needs to be materialized.
class SensingOperator {
 public:
  SensingOperator(SelectionIndex rows, FourierOperator base, std::vector<std::uint8_t> mask)
      : rows_(std::move(rows)), base_(base), mask_(std::move(mask)) {
    if (rows_.parent_len != base_.size() || static_cast<int>(mask_.size()) != base_.size()) {
      throw DimensionError("selection, mask and base operator sizes disagree");
    }
    if (!is_valid_selection(rows_)) throw std::invalid_argument("malformed selection index");
    std::size_t next = 0;
    for (int i = 0; i < base_.size(); ++i) {
      const bool selected = next < rows_.indices.size() && rows_.indices[next] == i;
      if (selected != (mask_[i] != 0)) {
        throw std::invalid_argument("selection is inconsistent with the mask at position " +
                                    std::to_string(i));
      }
      if (selected) ++next;
    }
  }

  int rows() const { return static_cast<int>(rows_.size()); }
  int cols() const { return base_.size(); }
  const SelectionIndex& selection() const { return rows_; }
  const FourierOperator& base() const { return base_; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  CVector apply(const CVector& x) const {
    const CVector full = base_.apply(x);
    CVector out(rows());
    for (int r = 0; r < rows(); ++r) out[r] = full[rows_.indices[r]];
    return out;
  }

  CVector apply_adjoint(const CVector& y) const {
    if (y.size() != rows()) {
      throw DimensionError("adjoint expects length " + std::to_string(rows()) + ", got " +
                           std::to_string(y.size()));
    }
    CVector full = CVector::Zero(cols());
    for (int r = 0; r < rows(); ++r) full[rows_.indices[r]] = y[r];
    return base_.apply_adjoint(full);
  }

  // Materialized matrix, column by column. Meant for small test sizes.
  CMatrix dense() const {
    CMatrix out(rows(), cols());
    for (int c = 0; c < cols(); ++c) out.col(c) = apply(CVector::Unit(cols(), c));
    return out;
  }

 private:
  SelectionIndex rows_;
  FourierOperator base_;
  std::vector<std::uint8_t> mask_;
};

inline std::vector<std::uint8_t> mask_column(const OccupancyMask& mask, int symbol) {
  std::vector<std::uint8_t> out(mask.subcarriers());
  for (int i = 0; i < mask.subcarriers(); ++i) out[i] = mask.at(i, symbol);
  return out;
}

inline std::vector<std::uint8_t> mask_row(const OccupancyMask& mask, int subcarrier) {
  std::vector<std::uint8_t> out(mask.symbols());
  for (int m = 0; m < mask.symbols(); ++m) out[m] = mask.at(subcarrier, m);
  return out;
}

// Range model: a column y = Psi^{-1} P with Psi the unitary IDFT, so the
// base is the forward DFT.
inline SensingOperator range_sensing_operator(std::vector<std::uint8_t> mask_col,
                                              SelectionIndex sel) {
  const int n = static_cast<int>(mask_col.size());
  return SensingOperator(std::move(sel), FourierOperator(n, FourierDirection::Forward),
                         std::move(mask_col));
}

// Velocity model: a row k = Q Upsilon^{-1} with Upsilon the unitary DFT;
// transposed, the base is (Upsilon^{-1})^T, which is the (symmetric) IDFT.
inline SensingOperator velocity_sensing_operator(std::vector<std::uint8_t> mask_row_bits,
                                                 SelectionIndex sel) {
  const int n = static_cast<int>(mask_row_bits.size());
  return SensingOperator(std::move(sel), FourierOperator(n, FourierDirection::Inverse),
                         std::move(mask_row_bits));
}

inline CVector gather(const CVector& v, const SelectionIndex& sel) {
  CVector out(static_cast<Eigen::Index>(sel.size()));
  for (std::size_t r = 0; r < sel.size(); ++r) out[r] = v[sel.indices[r]];
  return out;
}

// 2D-FFT baseline: IDFT down each column (range), DFT along each row
// (Doppler), squared magnitude.
inline RMatrix periodogram_2d(const ChannelMatrix& chan) {
  CMatrix work(chan.subcarriers(), chan.symbols());
  for (int m = 0; m < chan.symbols(); ++m) work.col(m) = idft(chan.data.col(m));
  for (int n = 0; n < chan.subcarriers(); ++n) {
    const CVector row = work.row(n).transpose();
    work.row(n) = dft(row).transpose();
  }
  return work.cwiseAbs2();
}

}  // namespace ncsense

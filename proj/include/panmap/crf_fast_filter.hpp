#pragma once

#include <cstdint>
#include <vector>

namespace panmap {

// Approximate high-dimensional Gaussian filtering over a sparse bin grid:
// values are splatted to the 2^d surrounding bin corners with multilinear
// weights, blurred dimension-by-dimension with a short discrete kernel, and
// sliced back. Approximates out[i] = sum_j exp(-|f_i - f_j|^2 / 2) * in[j]
// for features already standardized by their bandwidths (bin size 1).
//
// The blur taps are variance-compensated so that splat + blur + slice matches
// the unit Gaussian closely at integer offsets.
class BinnedGaussianFilter {
 public:
  BinnedGaussianFilter(const std::vector<float>& features, int dim, int count);

  // in: count x channels row-major, out resized to match. Deterministic for
  // any thread count.
  void apply(const std::vector<double>& in, int channels,
             std::vector<double>& out) const;

  size_t num_cells() const { return num_cells_; }

 private:
  int dim_ = 0;
  int count_ = 0;
  int corners_ = 0;  // 2^dim
  size_t num_cells_ = 0;

  // Per node: corner cell IDs and multilinear weights.
  std::vector<int32_t> node_cells_;
  std::vector<float> node_weights_;
  // Inverted splat lists: per cell, the (node, weight) pairs contributing to
  // it, in ascending node order.
  std::vector<int32_t> cell_offsets_;
  std::vector<int32_t> cell_nodes_;
  std::vector<float> cell_weights_;
  // Blur neighbors: per cell and dimension, cell IDs at offsets
  // -2, -1, +1, +2 (-1 when the neighbor bin is empty).
  std::vector<int32_t> neighbors_;
};

}  // namespace panmap

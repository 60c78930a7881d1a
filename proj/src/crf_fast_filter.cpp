#include "panmap/crf_fast_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace panmap {

namespace {

// Discrete Gaussian taps at integer offsets 0, 1, 2. The two multilinear
// passes (splat, slice) each add 1/6 of variance, so the blur uses
// sigma^2 = 2/3 and is rescaled to integrate like the unit Gaussian.
constexpr double kBlurSigmaSq = 2.0 / 3.0;
const double kTap1Raw = std::exp(-1.0 / (2.0 * kBlurSigmaSq));
const double kTap2Raw = std::exp(-4.0 / (2.0 * kBlurSigmaSq));

struct CellKey {
  std::array<int32_t, 6> v{};  // unused dims stay 0
  friend bool operator==(const CellKey& a, const CellKey& b) {
    return a.v == b.v;
  }
};

struct CellKeyHash {
  size_t operator()(const CellKey& k) const {
    uint64_t h = 0x9e3779b97f4a7c15ull;
    for (int32_t x : k.v) {
      h ^= static_cast<uint64_t>(static_cast<uint32_t>(x)) + 0x9e3779b97f4a7c15ull +
           (h << 6) + (h >> 2);
    }
    return static_cast<size_t>(h);
  }
};

}  // namespace

BinnedGaussianFilter::BinnedGaussianFilter(const std::vector<float>& features,
                                           int dim, int count)
    : dim_(dim), count_(count), corners_(1 << dim) {
  if (dim < 1 || dim > 6) throw std::invalid_argument("filter dim must be 1..6");
  if (features.size() != static_cast<size_t>(dim) * count)
    throw std::invalid_argument("feature array size mismatch");

  std::unordered_map<CellKey, int32_t, CellKeyHash> cell_ids;
  std::vector<CellKey> cells;
  auto intern = [&](const CellKey& key) -> int32_t {
    auto [it, inserted] = cell_ids.try_emplace(key, static_cast<int32_t>(cells.size()));
    if (inserted) cells.push_back(key);
    return it->second;
  };

  node_cells_.resize(static_cast<size_t>(count) * corners_);
  node_weights_.resize(static_cast<size_t>(count) * corners_);
  for (int i = 0; i < count; ++i) {
    int32_t base[6];
    float frac[6];
    for (int d = 0; d < dim; ++d) {
      const float f = features[static_cast<size_t>(i) * dim + d];
      const float fl = std::floor(f);
      base[d] = static_cast<int32_t>(fl);
      frac[d] = f - fl;
    }
    for (int c = 0; c < corners_; ++c) {
      CellKey key;
      float w = 1.0f;
      for (int d = 0; d < dim; ++d) {
        const int bit = (c >> d) & 1;
        key.v[d] = base[d] + bit;
        w *= bit ? frac[d] : 1.0f - frac[d];
      }
      node_cells_[static_cast<size_t>(i) * corners_ + c] = intern(key);
      node_weights_[static_cast<size_t>(i) * corners_ + c] = w;
    }
  }
  num_cells_ = cells.size();

  // Invert the splat mapping into per-cell contribution lists. Nodes are
  // walked in ascending order, so each list is deterministic.
  std::vector<int32_t> counts(num_cells_, 0);
  for (int32_t id : node_cells_) ++counts[id];
  cell_offsets_.assign(num_cells_ + 1, 0);
  std::partial_sum(counts.begin(), counts.end(), cell_offsets_.begin() + 1);
  cell_nodes_.resize(node_cells_.size());
  cell_weights_.resize(node_cells_.size());
  std::vector<int32_t> fill(cell_offsets_.begin(), cell_offsets_.end() - 1);
  for (int i = 0; i < count; ++i) {
    for (int c = 0; c < corners_; ++c) {
      const int32_t cell = node_cells_[static_cast<size_t>(i) * corners_ + c];
      const int32_t slot = fill[cell]++;
      cell_nodes_[slot] = i;
      cell_weights_[slot] = node_weights_[static_cast<size_t>(i) * corners_ + c];
    }
  }

  neighbors_.assign(num_cells_ * dim * 4, -1);
  for (size_t cell = 0; cell < num_cells_; ++cell) {
    for (int d = 0; d < dim; ++d) {
      static constexpr int kOffsets[4] = {-2, -1, 1, 2};
      for (int k = 0; k < 4; ++k) {
        CellKey key = cells[cell];
        key.v[d] += kOffsets[k];
        auto it = cell_ids.find(key);
        neighbors_[(cell * dim + d) * 4 + k] =
            it == cell_ids.end() ? -1 : it->second;
      }
    }
  }
}

void BinnedGaussianFilter::apply(const std::vector<double>& in, int channels,
                                 std::vector<double>& out) const {
  if (in.size() != static_cast<size_t>(count_) * channels)
    throw std::invalid_argument("filter input size mismatch");
  out.assign(in.size(), 0.0);
  if (count_ == 0) return;

  const double scale =
      std::sqrt(2.0 * M_PI) / (1.0 + 2.0 * kTap1Raw + 2.0 * kTap2Raw);
  const double tap0 = scale, tap1 = scale * kTap1Raw, tap2 = scale * kTap2Raw;

  std::vector<double> values(num_cells_ * channels, 0.0);
  std::vector<double> scratch(num_cells_ * channels, 0.0);

  // Splat: gather per cell from its contributor list.
#pragma omp parallel for schedule(static)
  for (size_t cell = 0; cell < num_cells_; ++cell) {
    double* dst = values.data() + cell * channels;
    for (int32_t s = cell_offsets_[cell]; s < cell_offsets_[cell + 1]; ++s) {
      const double w = cell_weights_[s];
      const double* src = in.data() + static_cast<size_t>(cell_nodes_[s]) * channels;
      for (int ch = 0; ch < channels; ++ch) dst[ch] += w * src[ch];
    }
  }

  // Separable blur along each feature dimension.
  for (int d = 0; d < dim_; ++d) {
#pragma omp parallel for schedule(static)
    for (size_t cell = 0; cell < num_cells_; ++cell) {
      const int32_t* nb = neighbors_.data() + (cell * dim_ + d) * 4;
      double* dst = scratch.data() + cell * channels;
      const double* center = values.data() + cell * channels;
      for (int ch = 0; ch < channels; ++ch) dst[ch] = tap0 * center[ch];
      const double taps[4] = {tap2, tap1, tap1, tap2};
      for (int k = 0; k < 4; ++k) {
        if (nb[k] < 0) continue;
        const double* src = values.data() + static_cast<size_t>(nb[k]) * channels;
        for (int ch = 0; ch < channels; ++ch) dst[ch] += taps[k] * src[ch];
      }
    }
    values.swap(scratch);
  }

  // Slice: multilinear interpolation back to the nodes.
#pragma omp parallel for schedule(static)
  for (int i = 0; i < count_; ++i) {
    double* dst = out.data() + static_cast<size_t>(i) * channels;
    for (int c = 0; c < corners_; ++c) {
      const double w = node_weights_[static_cast<size_t>(i) * corners_ + c];
      const double* src =
          values.data() +
          static_cast<size_t>(node_cells_[static_cast<size_t>(i) * corners_ + c]) *
              channels;
      for (int ch = 0; ch < channels; ++ch) dst[ch] += w * src[ch];
    }
  }
}

}  // namespace panmap

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "panmap/voxel_map.hpp"

namespace panmap {

struct CrfConfig {
  float w1 = 10.0f;           // appearance kernel weight
  float w2 = 15.0f;           // smoothness kernel weight
  float theta_alpha = 0.05f;  // spatial bandwidth, meters
  float theta_beta = 20.0f;   // color bandwidth, 0-255 units
  int iterations = 5;
  int max_blocks_per_submap = 25;
};

struct CrfNode {
  Eigen::Vector3f position;        // voxel center, meters
  std::array<float, 3> color;      // RGB in [0, 255]
  PanopticLabel label;
  float weight_l = 0.0f;
  float weight_d = 0.0f;
  // Write-back address.
  BlockIndex block;
  int voxel_linear = 0;
};

// One dense-CRF inference problem: the near-surface observed voxels of a
// group of blocks, plus the distinct labels present among them (sorted, so
// label indexing is deterministic).
struct CrfSubmap {
  std::vector<CrfNode> nodes;
  std::vector<PanopticLabel> label_set;

  int label_index(PanopticLabel l) const;  // -1 if absent
};

// Unary potentials -log p for one node: p(current label) from the stored
// weight ratio, the remainder split evenly over the other M-1 labels;
// probabilities are floored at 1e-10 before the log.
std::vector<double> build_unary(const CrfNode& node,
                                const std::vector<PanopticLabel>& label_set);

// Gaussian appearance/smoothness kernel pair for a node pair.
std::pair<double, double> pairwise_kernels(const CrfNode& a, const CrfNode& b,
                                           const CrfConfig& cfg);

// Nodes for all voxels of `blocks` with weight_d > 0 and |tsdf| strictly
// inside the truncation band, plus the sorted label set.
CrfSubmap build_submap(const VolumetricMap& map,
                       const std::vector<BlockIndex>& blocks);

// Dense mean-field inference with exact O(N^2 M) message passing. The
// reference path: refuses problems above 20,000 nodes (std::length_error).
// Returns the final per-node labels (empty label change when M < 2: the
// input labels are returned unchanged).
std::vector<PanopticLabel> mean_field_brute(const CrfSubmap& submap,
                                            const CrfConfig& cfg);

// Same fixed-point iteration with messages approximated by a binned Gaussian
// convolution over the feature space (trilinear splat -> separable blur ->
// trilinear slice).
std::vector<PanopticLabel> mean_field_fast(const CrfSubmap& submap,
                                           const CrfConfig& cfg);

// Shared mean-field skeleton: the message functional fills, for the current
// marginals q (N x M row-major), the kernel-weighted label messages and the
// per-node kernel totals.
namespace crf_detail {
using MessageFn = std::function<void(const std::vector<double>& q,
                                     std::vector<double>& messages,
                                     std::vector<double>& totals)>;
std::vector<PanopticLabel> mean_field_iterate(const CrfSubmap& submap,
                                              const CrfConfig& cfg,
                                              const MessageFn& message_fn);
}  // namespace crf_detail

// Partitions the allocated blocks into spatially contiguous groups of at
// most max_blocks each (6-connectivity, BFS region growing seeded from the
// lowest unassigned block index).
std::vector<std::vector<BlockIndex>> divide_map(const VolumetricMap& map,
                                                int max_blocks);

struct RegularizeStats {
  size_t submap_count = 0;
  size_t node_count = 0;
  size_t labels_changed = 0;
  size_t max_labels_per_submap = 0;  // M is counted per submap
  double seconds = 0.0;
};

// Full regularization pass: divide the map, run fast mean-field per submap,
// write the relabeled nodes back (label weights untouched). Requires
// exclusive map access; submaps are processed independently.
RegularizeStats regularize(VolumetricMap& map, const CrfConfig& cfg);

}  // namespace panmap

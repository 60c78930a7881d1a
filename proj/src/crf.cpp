#include "panmap/crf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <unordered_map>

#include "panmap/crf_fast_filter.hpp"
#include "panmap/logging.hpp"

namespace panmap {

namespace {
constexpr double kProbabilityFloor = 1e-10;

void check_config(const CrfConfig& cfg) {
  if (cfg.theta_alpha <= 0.0f || cfg.theta_beta <= 0.0f)
    throw std::invalid_argument("CRF kernel bandwidths must be positive");
  if (cfg.iterations < 0)
    throw std::invalid_argument("CRF iteration count must be >= 0");
}
}  // namespace

int CrfSubmap::label_index(PanopticLabel l) const {
  auto it = std::lower_bound(label_set.begin(), label_set.end(), l);
  if (it == label_set.end() || *it != l) return -1;
  return static_cast<int>(it - label_set.begin());
}

std::vector<double> build_unary(const CrfNode& node,
                                const std::vector<PanopticLabel>& label_set) {
  const int m = static_cast<int>(label_set.size());
  if (m < 2) throw std::invalid_argument("build_unary requires M >= 2");
  if (node.weight_d <= 0.0f)
    throw std::invalid_argument("build_unary requires an observed voxel");

  const double ratio = std::clamp(
      static_cast<double>(node.weight_l) / node.weight_d, 0.0, 1.0);
  const double p_current = 0.5 * (1.0 + ratio);
  const double p_other = (1.0 - p_current) / (m - 1);

  std::vector<double> row(m);
  for (int l = 0; l < m; ++l) {
    const bool current = (label_set[l] == node.label);
    const double p = std::max(current ? p_current : p_other, kProbabilityFloor);
    row[l] = -std::log(p);
  }
  return row;
}

std::pair<double, double> pairwise_kernels(const CrfNode& a, const CrfNode& b,
                                           const CrfConfig& cfg) {
  const double d2 = (a.position - b.position).cast<double>().squaredNorm();
  double c2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double dc = static_cast<double>(a.color[i]) - b.color[i];
    c2 += dc * dc;
  }
  const double sa = d2 / (2.0 * cfg.theta_alpha * cfg.theta_alpha);
  const double sb = c2 / (2.0 * cfg.theta_beta * cfg.theta_beta);
  const double k2 = std::exp(-sa);
  const double k1 = k2 * std::exp(-sb);
  return {k1, k2};
}

CrfSubmap build_submap(const VolumetricMap& map,
                       const std::vector<BlockIndex>& blocks) {
  std::vector<BlockIndex> sorted = blocks;
  std::sort(sorted.begin(), sorted.end());

  CrfSubmap submap;
  const float truncation = map.truncation();
  for (const BlockIndex& index : sorted) {
    const VoxelBlock* block = map.find_block(index);
    if (!block) continue;
    for (int linear = 0; linear < static_cast<int>(block->num_voxels());
         ++linear) {
      const Voxel& v = block->voxel(linear);
      if (v.weight_d <= 0.0f || std::abs(v.tsdf) >= truncation) continue;
      CrfNode node;
      node.position = map.voxel_center(index, linear).cast<float>();
      node.color = v.color;
      node.label = v.label;
      node.weight_l = v.weight_l;
      node.weight_d = v.weight_d;
      node.block = index;
      node.voxel_linear = linear;
      submap.nodes.push_back(node);
    }
  }

  std::vector<PanopticLabel> labels;
  labels.reserve(submap.nodes.size());
  for (const CrfNode& n : submap.nodes) labels.push_back(n.label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  submap.label_set = std::move(labels);
  return submap;
}

namespace crf_detail {

std::vector<PanopticLabel> mean_field_iterate(const CrfSubmap& submap,
                                              const CrfConfig& cfg,
                                              const MessageFn& message_fn) {
  const int n = static_cast<int>(submap.nodes.size());
  const int m = static_cast<int>(submap.label_set.size());

  std::vector<PanopticLabel> out(n);
  for (int i = 0; i < n; ++i) out[i] = submap.nodes[i].label;
  if (n == 0 || m < 2) return out;

  std::vector<double> unary(static_cast<size_t>(n) * m);
  for (int i = 0; i < n; ++i) {
    const std::vector<double> row = build_unary(submap.nodes[i], submap.label_set);
    std::copy(row.begin(), row.end(), unary.begin() + static_cast<size_t>(i) * m);
  }

  // Q starts as the normalized unary distribution.
  std::vector<double> q(static_cast<size_t>(n) * m);
  auto softmax_row = [m](const double* neg_energy, double* dst) {
    double peak = neg_energy[0];
    for (int l = 1; l < m; ++l) peak = std::max(peak, neg_energy[l]);
    double sum = 0.0;
    for (int l = 0; l < m; ++l) {
      dst[l] = std::exp(neg_energy[l] - peak);
      sum += dst[l];
    }
    for (int l = 0; l < m; ++l) dst[l] /= sum;
  };

  {
    std::vector<double> neg(m);
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < m; ++l) neg[l] = -unary[static_cast<size_t>(i) * m + l];
      softmax_row(neg.data(), q.data() + static_cast<size_t>(i) * m);
    }
  }

  std::vector<double> messages(static_cast<size_t>(n) * m);
  std::vector<double> totals(n);
  for (int it = 0; it < cfg.iterations; ++it) {
    std::fill(messages.begin(), messages.end(), 0.0);
    std::fill(totals.begin(), totals.end(), 0.0);
    message_fn(q, messages, totals);

#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      double neg[64];
      std::vector<double> big;
      double* neg_ptr = neg;
      if (m > 64) {
        big.resize(m);
        neg_ptr = big.data();
      }
      const size_t base = static_cast<size_t>(i) * m;
      for (int l = 0; l < m; ++l) {
        const double penalty = totals[i] - messages[base + l];  // Potts
        neg_ptr[l] = -unary[base + l] - penalty;
      }
      softmax_row(neg_ptr, q.data() + base);
    }
  }

  for (int i = 0; i < n; ++i) {
    const size_t base = static_cast<size_t>(i) * m;
    int best = 0;
    for (int l = 1; l < m; ++l)
      if (q[base + l] > q[base + best]) best = l;
    out[i] = submap.label_set[best];
  }
  return out;
}

}  // namespace crf_detail

std::vector<PanopticLabel> mean_field_brute(const CrfSubmap& submap,
                                            const CrfConfig& cfg) {
  check_config(cfg);
  const int n = static_cast<int>(submap.nodes.size());
  if (n > 20000)
    throw std::length_error(
        "mean_field_brute supports at most 20000 nodes; use mean_field_fast");
  const int m = static_cast<int>(submap.label_set.size());

  // Flat copies for the O(N^2) loop.
  std::vector<double> pos(static_cast<size_t>(n) * 3), col(static_cast<size_t>(n) * 3);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d) {
      pos[static_cast<size_t>(i) * 3 + d] = submap.nodes[i].position[d];
      col[static_cast<size_t>(i) * 3 + d] = submap.nodes[i].color[d];
    }
  }
  const double inv2a = 1.0 / (2.0 * cfg.theta_alpha * cfg.theta_alpha);
  const double inv2b = 1.0 / (2.0 * cfg.theta_beta * cfg.theta_beta);
  const double w1 = cfg.w1, w2 = cfg.w2;

  auto messages = [&](const std::vector<double>& q,
                      std::vector<double>& msg, std::vector<double>& totals) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      const double xi = pos[i * 3], yi = pos[i * 3 + 1], zi = pos[i * 3 + 2];
      const double ri = col[i * 3], gi = col[i * 3 + 1], bi = col[i * 3 + 2];
      double* msg_row = msg.data() + static_cast<size_t>(i) * m;
      double total = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double dx = xi - pos[j * 3], dy = yi - pos[j * 3 + 1],
                     dz = zi - pos[j * 3 + 2];
        const double d2 = dx * dx + dy * dy + dz * dz;
        const double dr = ri - col[j * 3], dg = gi - col[j * 3 + 1],
                     db = bi - col[j * 3 + 2];
        const double c2 = dr * dr + dg * dg + db * db;
        const double k2 = std::exp(-d2 * inv2a);
        const double u = k2 * (w1 * std::exp(-c2 * inv2b) + w2);
        total += u;
        const double* q_row = q.data() + static_cast<size_t>(j) * m;
        for (int l = 0; l < m; ++l) msg_row[l] += u * q_row[l];
      }
      totals[i] = total;
    }
  };
  return crf_detail::mean_field_iterate(submap, cfg, messages);
}

std::vector<PanopticLabel> mean_field_fast(const CrfSubmap& submap,
                                           const CrfConfig& cfg) {
  check_config(cfg);
  const int n = static_cast<int>(submap.nodes.size());
  const int m = static_cast<int>(submap.label_set.size());
  if (n == 0 || m < 2) return crf_detail::mean_field_iterate(submap, cfg, {});

  // Feature-space filters: smoothness over position only, appearance over
  // position + color, both standardized by their bandwidths.
  std::vector<float> f_pos(static_cast<size_t>(n) * 3);
  std::vector<float> f_app(static_cast<size_t>(n) * 6);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d) {
      const float fp = submap.nodes[i].position[d] / cfg.theta_alpha;
      f_pos[static_cast<size_t>(i) * 3 + d] = fp;
      f_app[static_cast<size_t>(i) * 6 + d] = fp;
      f_app[static_cast<size_t>(i) * 6 + 3 + d] =
          submap.nodes[i].color[d] / cfg.theta_beta;
    }
  }
  BinnedGaussianFilter filter_smooth(f_pos, 3, n);
  BinnedGaussianFilter filter_app(f_app, 6, n);

  // Kernel totals from filtering the all-ones vector, minus the self term.
  std::vector<double> ones(n, 1.0), tot_smooth(n), tot_app(n);
  filter_smooth.apply(ones, 1, tot_smooth);
  filter_app.apply(ones, 1, tot_app);

  std::vector<double> buf_smooth(static_cast<size_t>(n) * m);
  std::vector<double> buf_app(static_cast<size_t>(n) * m);
  auto messages = [&](const std::vector<double>& q,
                      std::vector<double>& msg, std::vector<double>& totals) {
    filter_smooth.apply(q, m, buf_smooth);
    filter_app.apply(q, m, buf_app);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      const size_t base = static_cast<size_t>(i) * m;
      for (int l = 0; l < m; ++l) {
        const double m1 = std::max(buf_app[base + l] - q[base + l], 0.0);
        const double m2 = std::max(buf_smooth[base + l] - q[base + l], 0.0);
        msg[base + l] = cfg.w1 * m1 + cfg.w2 * m2;
      }
      totals[i] = cfg.w1 * std::max(tot_app[i] - 1.0, 0.0) +
                  cfg.w2 * std::max(tot_smooth[i] - 1.0, 0.0);
    }
  };
  return crf_detail::mean_field_iterate(submap, cfg, messages);
}

std::vector<std::vector<BlockIndex>> divide_map(const VolumetricMap& map,
                                                int max_blocks) {
  if (max_blocks < 1)
    throw std::invalid_argument("max_blocks must be >= 1");

  const std::vector<BlockIndex> sorted = map.sorted_block_indices();
  std::unordered_map<BlockIndex, bool, BlockIndexHash> taken;
  taken.reserve(sorted.size());
  for (const BlockIndex& b : sorted) taken[b] = false;

  static constexpr int kNeighborOffsets[6][3] = {
      {-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};

  std::vector<std::vector<BlockIndex>> submaps;
  size_t cursor = 0;
  while (true) {
    while (cursor < sorted.size() && taken[sorted[cursor]]) ++cursor;
    if (cursor >= sorted.size()) break;

    // BFS region growing; stop enqueueing once the budget is committed.
    std::vector<BlockIndex> submap;
    std::deque<BlockIndex> queue;
    queue.push_back(sorted[cursor]);
    taken[sorted[cursor]] = true;
    size_t committed = 1;
    while (!queue.empty()) {
      const BlockIndex current = queue.front();
      queue.pop_front();
      submap.push_back(current);
      for (const auto& off : kNeighborOffsets) {
        if (committed >= static_cast<size_t>(max_blocks)) break;
        const BlockIndex nb{current.x + off[0], current.y + off[1],
                            current.z + off[2]};
        auto it = taken.find(nb);
        if (it == taken.end() || it->second) continue;
        it->second = true;
        queue.push_back(nb);
        ++committed;
      }
    }
    submaps.push_back(std::move(submap));
  }
  return submaps;
}

RegularizeStats regularize(VolumetricMap& map, const CrfConfig& cfg) {
  check_config(cfg);
  const auto start = std::chrono::steady_clock::now();

  RegularizeStats stats;
  const auto submaps = divide_map(map, cfg.max_blocks_per_submap);
  stats.submap_count = submaps.size();

  for (const auto& blocks : submaps) {
    CrfSubmap submap = build_submap(map, blocks);
    stats.node_count += submap.nodes.size();
    stats.max_labels_per_submap =
        std::max(stats.max_labels_per_submap, submap.label_set.size());
    if (submap.nodes.empty() || submap.label_set.size() < 2) continue;

    const std::vector<PanopticLabel> relabeled = mean_field_fast(submap, cfg);
    for (size_t i = 0; i < submap.nodes.size(); ++i) {
      if (relabeled[i] == submap.nodes[i].label) continue;
      VoxelBlock* block = map.find_block(submap.nodes[i].block);
      block->voxel(submap.nodes[i].voxel_linear).label = relabeled[i];
      ++stats.labels_changed;
    }
  }

  stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  PANMAP_LOG_DEBUG("regularize: %zu submaps, %zu nodes, %zu labels changed, "
                   "max M %zu, %.3f s",
                   stats.submap_count, stats.node_count, stats.labels_changed,
                   stats.max_labels_per_submap, stats.seconds);
  return stats;
}

}  // namespace panmap

// Test-only reference implementations, independent of the library's
// integration path: a scalar single-voxel replay of the update rules plus a
// direct-sum TSDF and the exact label-probability bookkeeping the map cannot
// afford to store.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "panmap/label.hpp"

namespace panmap::oracle {

struct Observation {
  float dist = 0.0f;
  float weight = 1.0f;
  PanopticLabel label;
};

// Replays the voxel update algebra one observation at a time. TSDF is also
// recomputed as a direct weighted sum, giving an independent route to the
// same value.
struct VoxelReplay {
  float tsdf = 0.0f;
  float weight_d = 0.0f;
  PanopticLabel label;
  float weight_l = 0.0f;

  double sum_wd = 0.0;  // direct-sum accumulators
  double sum_w = 0.0;

  void observe(const Observation& obs) {
    tsdf = (weight_d * tsdf + obs.weight * obs.dist) / (weight_d + obs.weight);
    weight_d += obs.weight;
    sum_wd += static_cast<double>(obs.weight) * obs.dist;
    sum_w += obs.weight;

    if (obs.label == label) {
      weight_l += obs.weight;
    } else if (obs.weight > weight_l) {
      weight_l = obs.weight - weight_l;
      label = obs.label;
    } else {
      weight_l -= obs.weight;
    }
  }

  double direct_tsdf() const { return sum_w > 0.0 ? sum_wd / sum_w : 0.0; }
};

// Exact agreement/disagreement weight sums with respect to a query label,
// over a full observation log.
struct LabelSums {
  double agree = 0.0;
  double disagree = 0.0;
};

inline LabelSums label_weight_sums(const std::vector<Observation>& log,
                                   PanopticLabel query) {
  LabelSums sums;
  for (const auto& obs : log) {
    if (obs.label == query) sums.agree += obs.weight;
    else sums.disagree += obs.weight;
  }
  return sums;
}

// Exact probability that `query` is correct, from the full log.
inline double exact_label_probability(const std::vector<Observation>& log,
                                      PanopticLabel query) {
  const LabelSums sums = label_weight_sums(log, query);
  const double total = sums.agree + sums.disagree;
  return total > 0.0 ? sums.agree / total : 0.0;
}

}  // namespace panmap::oracle

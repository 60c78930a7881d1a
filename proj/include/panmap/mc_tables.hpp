#pragma once

#include <cstdint>

namespace panmap {

// Cube corner c is at offset (c&1 ? 1:0, ...) per kMcCornerOffsets; bit c of
// the configuration index is set when the corner's TSDF is negative (inside).
// Edges connect the corner pairs in kMcEdgeCorners.
extern const int8_t kMcTriangleTable[256][16];

constexpr int kMcCornerOffsets[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};

constexpr int kMcEdgeCorners[12][2] = {
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
    {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

}  // namespace panmap

// Copyright 2026 The pslabel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pslabel/nms.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "pslabel/error.h"

namespace pslabel {
namespace {

// Groups at or below this size skip the spatial index.
constexpr std::size_t kLinearScanLimit = 48;

void ValidateParams(const NmsParams& params) {
  if (!(params.iou_threshold > 0.0 && params.iou_threshold <= 1.0)) {
    throw InvalidArgumentError("IoU threshold must lie in (0, 1]");
  }
  if (!(params.score_threshold >= 0.0 && params.score_threshold <= 1.0)) {
    throw InvalidArgumentError("score threshold must lie in [0, 1]");
  }
}

void ValidateDetections(std::span<const Detection> dets) {
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const Detection& d = dets[i];
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw InvalidArgumentError("detection " + std::to_string(i) +
                                 ": score outside [0, 1]");
    }
    if (d.centerness && !(*d.centerness >= 0.0 && *d.centerness <= 1.0)) {
      throw InvalidArgumentError("detection " + std::to_string(i) +
                                 ": centerness outside [0, 1]");
    }
  }
}

bool CanonicalLess(std::span<const Detection> dets, std::size_t a,
                   std::size_t b) {
  const Detection& da = dets[a];
  const Detection& db = dets[b];
  if (RanksBefore(da, db)) return true;
  if (RanksBefore(db, da)) return false;
  if (da.image_id != db.image_id) return da.image_id < db.image_id;
  if (da.class_id != db.class_id) return da.class_id < db.class_id;
  return a < b;
}

// Surviving indices grouped by (image, class), each group in rank order.
std::vector<std::vector<std::size_t>> RankedGroups(
    std::span<const Detection> dets, double score_threshold) {
  std::vector<std::size_t> order;
  order.reserve(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].score >= score_threshold) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Detection& da = dets[a];
    const Detection& db = dets[b];
    if (da.image_id != db.image_id) return da.image_id < db.image_id;
    if (da.class_id != db.class_id) return da.class_id < db.class_id;
    return CanonicalLess(dets, a, b);
  });
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Detection& d = dets[order[k]];
    if (k == 0 || d.image_id != dets[order[k - 1]].image_id ||
        d.class_id != dets[order[k - 1]].class_id) {
      groups.emplace_back();
    }
    groups.back().push_back(order[k]);
  }
  return groups;
}

// Uniform grid over box top-left corners. A box b can reach IoU >= t with a
// pivot p only if w_b <= w_p / t and b.x1 lies in [p.x1 - w_b, p.x2) (same
// for y), so a pivot only has to look at corners inside that window.
class CornerGrid {
 public:
  CornerGrid(std::span<const Detection> dets,
             std::span<const std::size_t> ranked) {
    const std::size_t n = ranked.size();
    std::vector<double> extents(n);
    min_x_ = min_y_ = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double max_y = max_x;
    for (std::size_t p = 0; p < n; ++p) {
      const BBox& b = dets[ranked[p]].bbox;
      extents[p] = std::max(b.width(), b.height());
      min_x_ = std::min(min_x_, b.x1());
      min_y_ = std::min(min_y_, b.y1());
      max_x = std::max(max_x, b.x1());
      max_y = std::max(max_y, b.y1());
    }
    std::nth_element(extents.begin(), extents.begin() + n / 2, extents.end());
    const double span_x = max_x - min_x_;
    const double span_y = max_y - min_y_;
    cell_ = extents[n / 2];
    const double floor_cell = std::max(span_x, span_y) / 4096.0;
    if (!(cell_ > floor_cell)) cell_ = floor_cell;
    if (!(cell_ > 0.0)) cell_ = 1.0;
    const double max_cells = 4.0 * static_cast<double>(n) + 16.0;
    double cells = (span_x / cell_ + 1.0) * (span_y / cell_ + 1.0);
    if (cells > max_cells) {
      cell_ *= std::sqrt(cells / max_cells);
    }
    nx_ = static_cast<std::size_t>(span_x / cell_) + 1;
    ny_ = static_cast<std::size_t>(span_y / cell_) + 1;

    std::vector<std::size_t> cell_of(n);
    offsets_.assign(nx_ * ny_ + 1, 0);
    for (std::size_t p = 0; p < n; ++p) {
      const BBox& b = dets[ranked[p]].bbox;
      cell_of[p] = CellY(b.y1()) * nx_ + CellX(b.x1());
      ++offsets_[cell_of[p] + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    items_.resize(n);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t p = 0; p < n; ++p) items_[fill[cell_of[p]]++] = p;
  }

  // Calls fn(p) for every position whose top-left corner lies in
  // [x_lo, x_hi] x [y_lo, y_hi].
  template <typename Fn>
  void Visit(double x_lo, double y_lo, double x_hi, double y_hi,
             Fn&& fn) const {
    const std::size_t cx0 = CellX(x_lo), cx1 = CellX(x_hi);
    const std::size_t cy0 = CellY(y_lo), cy1 = CellY(y_hi);
    for (std::size_t cy = cy0; cy <= cy1; ++cy) {
      for (std::size_t cx = cx0; cx <= cx1; ++cx) {
        const std::size_t c = cy * nx_ + cx;
        for (std::size_t k = offsets_[c]; k < offsets_[c + 1]; ++k) {
          fn(items_[k]);
        }
      }
    }
  }

 private:
  std::size_t CellX(double x) const { return Cell(x - min_x_, nx_); }
  std::size_t CellY(double y) const { return Cell(y - min_y_, ny_); }
  std::size_t Cell(double offset, std::size_t limit) const {
    if (!(offset > 0.0)) return 0;
    const double c = offset / cell_;
    if (c >= static_cast<double>(limit - 1)) return limit - 1;
    return static_cast<std::size_t>(c);
  }

  double min_x_ = 0.0;
  double min_y_ = 0.0;
  double cell_ = 1.0;
  std::size_t nx_ = 1;
  std::size_t ny_ = 1;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> items_;
};

// Runs greedy clustering over one rank-ordered group. `on_cluster` receives
// the pivot's input index and all member input indices (pivot included) in
// canonical rank order, so statistics do not depend on input order.
template <typename Fn>
void ForEachCluster(std::span<const Detection> dets,
                    std::span<const std::size_t> ranked, double iou_threshold,
                    Fn&& on_cluster) {
  const std::size_t n = ranked.size();
  std::vector<char> alive(n, 1);
  std::vector<std::size_t> members;

  auto finish = [&](std::size_t pivot_pos) {
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) {
                return CanonicalLess(dets, a, b);
              });
    on_cluster(ranked[pivot_pos], std::span<const std::size_t>(members));
  };

  if (n <= kLinearScanLimit) {
    for (std::size_t p = 0; p < n; ++p) {
      if (!alive[p]) continue;
      alive[p] = 0;
      const BBox& pivot = dets[ranked[p]].bbox;
      members.assign(1, ranked[p]);
      for (std::size_t q = p + 1; q < n; ++q) {
        if (alive[q] && Iou(dets[ranked[q]].bbox, pivot) >= iou_threshold) {
          alive[q] = 0;
          members.push_back(ranked[q]);
        }
      }
      finish(p);
    }
    return;
  }

  const CornerGrid grid(dets, ranked);
  // Relative slack so rounding in Iou can never admit a box outside the
  // window.
  const double reach = (1.0 + 1e-9) / iou_threshold;
  for (std::size_t p = 0; p < n; ++p) {
    if (!alive[p]) continue;
    alive[p] = 0;
    const BBox& pivot = dets[ranked[p]].bbox;
    members.assign(1, ranked[p]);
    const double pad_x = pivot.width() * reach + 1e-9 * std::abs(pivot.x1());
    const double pad_y = pivot.height() * reach + 1e-9 * std::abs(pivot.y1());
    grid.Visit(pivot.x1() - pad_x, pivot.y1() - pad_y, pivot.x2(), pivot.y2(),
               [&](std::size_t q) {
                 if (alive[q] &&
                     Iou(dets[ranked[q]].bbox, pivot) >= iou_threshold) {
                   alive[q] = 0;
                   members.push_back(ranked[q]);
                 }
               });
    finish(p);
  }
}

// Shift-then-two-pass statistics: deviations are taken relative to the first
// member so that identical boxes give exactly zero spread.
bool FillClusterStats(std::span<const BBox> cluster, ClusterStats* stats) {
  const std::size_t n = cluster.size();
  const std::array<double, 4> origin = cluster[0].corners();
  double sum_w = 0.0;
  double sum_h = 0.0;
  std::array<double, 4> mean{};
  for (const BBox& b : cluster) {
    const std::array<double, 4> c = b.corners();
    for (int k = 0; k < 4; ++k) mean[k] += c[k] - origin[k];
    sum_w += b.width();
    sum_h += b.height();
  }
  for (double& m : mean) m /= static_cast<double>(n);
  std::array<double, 4> sq{};
  for (const BBox& b : cluster) {
    const std::array<double, 4> c = b.corners();
    for (int k = 0; k < 4; ++k) {
      const double d = (c[k] - origin[k]) - mean[k];
      sq[k] += d * d;
    }
  }
  for (int k = 0; k < 4; ++k) {
    stats->std_dev[k] = std::sqrt(sq[k] / static_cast<double>(n));
  }
  stats->mean_width = sum_w / static_cast<double>(n);
  stats->mean_height = sum_h / static_cast<double>(n);
  stats->count = static_cast<int>(n);
  return stats->mean_width > 0.0 && stats->mean_height > 0.0;
}

double UncertaintyFromStats(const ClusterStats& s,
                            UncertaintyIndexing indexing) {
  double acc = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const int idx =
          indexing == UncertaintyIndexing::kCornerAxis ? 2 * i + j : i + j;
      acc += s.std_dev[idx] / (j == 0 ? s.mean_width : s.mean_height);
    }
  }
  return acc / 4.0;
}

}  // namespace

bool RanksBefore(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.bbox.x1() != b.bbox.x1()) return a.bbox.x1() < b.bbox.x1();
  if (a.bbox.y1() != b.bbox.y1()) return a.bbox.y1() < b.bbox.y1();
  if (a.bbox.x2() != b.bbox.x2()) return a.bbox.x2() < b.bbox.x2();
  return a.bbox.y2() < b.bbox.y2();
}

ClusterStats ComputeClusterStats(std::span<const BBox> cluster) {
  if (cluster.size() < 2) {
    throw InvalidArgumentError("cluster needs at least 2 boxes");
  }
  ClusterStats stats;
  FillClusterStats(cluster, &stats);
  return stats;
}

double ClusterUncertainty(std::span<const BBox> cluster,
                          UncertaintyIndexing indexing) {
  if (cluster.size() < 2) {
    throw InvalidArgumentError("cluster needs at least 2 boxes");
  }
  ClusterStats stats;
  if (!FillClusterStats(cluster, &stats)) {
    throw DegenerateClusterError("cluster mean width or height is zero");
  }
  return UncertaintyFromStats(stats, indexing);
}

std::vector<Detection> StandardNms(std::span<const Detection> dets,
                                   const NmsParams& params) {
  ValidateParams(params);
  ValidateDetections(dets);
  std::vector<std::size_t> kept;
  for (const auto& group : RankedGroups(dets, params.score_threshold)) {
    ForEachCluster(dets, group, params.iou_threshold,
                   [&](std::size_t pivot, std::span<const std::size_t>) {
                     kept.push_back(pivot);
                   });
  }
  std::sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
    return CanonicalLess(dets, a, b);
  });
  std::vector<Detection> out;
  out.reserve(kept.size());
  for (std::size_t i : kept) out.push_back(dets[i]);
  return out;
}

std::vector<PseudoLabel> NmsUnc(std::span<const Detection> dets,
                                const NmsParams& params,
                                NmsDiagnostics* diagnostics) {
  ValidateParams(params);
  ValidateDetections(dets);
  NmsDiagnostics tally;
  std::vector<std::pair<std::size_t, PseudoLabel>> emitted;
  std::vector<BBox> boxes;
  ClusterStats stats;
  for (const auto& group : RankedGroups(dets, params.score_threshold)) {
    ForEachCluster(
        dets, group, params.iou_threshold,
        [&](std::size_t pivot, std::span<const std::size_t> members) {
          ++tally.clusters;
          if (members.size() < 2) {
            ++tally.singleton_drops;
            return;
          }
          boxes.clear();
          for (std::size_t m : members) boxes.push_back(dets[m].bbox);
          if (!FillClusterStats(boxes, &stats)) {
            ++tally.degenerate_drops;
            return;
          }
          const Detection& d = dets[pivot];
          emitted.emplace_back(
              pivot, PseudoLabel{d.bbox, d.score,
                                 UncertaintyFromStats(stats, params.indexing),
                                 static_cast<int>(members.size()), d.class_id,
                                 d.image_id});
        });
  }
  std::sort(emitted.begin(), emitted.end(),
            [&](const auto& a, const auto& b) {
              return CanonicalLess(dets, a.first, b.first);
            });
  std::vector<PseudoLabel> out;
  out.reserve(emitted.size());
  for (auto& [index, label] : emitted) out.push_back(label);
  if (diagnostics != nullptr) *diagnostics = tally;
  return out;
}

}  // namespace pslabel

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

#ifndef PSLABEL_TARGETS_H_
#define PSLABEL_TARGETS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pslabel/dsat.h"
#include "pslabel/nms.h"

namespace pslabel {

inline constexpr double kDefaultUncertaintyThreshold = 0.08;
inline constexpr double kDefaultEmaRate = 0.999;

enum class CenternessMode {
  kProduct,
  // sqrt(score * centerness); experimental.
  kGeometricMean,
};

// Final confidence of a dense prediction: the classification score, rescaled
// by centerness when the head predicts one. Both inputs must lie in [0, 1].
double FinalScore(double cls_score, std::optional<double> centerness,
                  CenternessMode mode = CenternessMode::kProduct);

// Label sets consumed by an unsupervised detection loss. Both are filtered
// independently from the same pseudo labels.
struct TargetSets {
  // score >= sigma_cls
  std::vector<PseudoLabel> cls_targets;
  // uncertainty < sigma_unc
  std::vector<PseudoLabel> reg_targets;

  std::size_t n_cls() const { return cls_targets.size(); }
  std::size_t n_reg() const { return reg_targets.size(); }
};

TargetSets BuildTargetSets(
    std::span<const PseudoLabel> labels,
    double sigma_cls = kDefaultClassificationThreshold,
    double sigma_unc = kDefaultUncertaintyThreshold);

// Flat model parameters. Entries must be finite.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

// rate * teacher + (1 - rate) * student, element-wise. Throws
// InvalidArgumentError on length mismatch or rate outside [0, 1].
ParamVector EmaUpdate(const ParamVector& teacher, const ParamVector& student,
                      double rate = kDefaultEmaRate);

}  // namespace pslabel

#endif  // PSLABEL_TARGETS_H_

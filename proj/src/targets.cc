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

#include "pslabel/targets.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "pslabel/error.h"

namespace pslabel {

double FinalScore(double cls_score, std::optional<double> centerness,
                  CenternessMode mode) {
  if (!(cls_score >= 0.0 && cls_score <= 1.0)) {
    throw InvalidArgumentError("classification score must lie in [0, 1]");
  }
  if (!centerness) return cls_score;
  if (!(*centerness >= 0.0 && *centerness <= 1.0)) {
    throw InvalidArgumentError("centerness must lie in [0, 1]");
  }
  const double product = cls_score * *centerness;
  return mode == CenternessMode::kProduct ? product : std::sqrt(product);
}

TargetSets BuildTargetSets(std::span<const PseudoLabel> labels,
                           double sigma_cls, double sigma_unc) {
  TargetSets sets;
  for (const PseudoLabel& l : labels) {
    if (l.score >= sigma_cls) sets.cls_targets.push_back(l);
    if (l.uncertainty < sigma_unc) sets.reg_targets.push_back(l);
  }
  return sets;
}

ParamVector::ParamVector(std::vector<double> values)
    : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidArgumentError("parameter " + std::to_string(i) +
                                 " is not finite");
    }
  }
}

ParamVector EmaUpdate(const ParamVector& teacher, const ParamVector& student,
                      double rate) {
  if (teacher.size() != student.size()) {
    throw InvalidArgumentError(
        "EMA length mismatch: teacher " + std::to_string(teacher.size()) +
        " vs student " + std::to_string(student.size()));
  }
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw InvalidArgumentError("EMA rate must lie in [0, 1]");
  }
  std::vector<double> out(teacher.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = teacher[i];
    const double s = student[i];
    // Written as a step from t toward s so that t == s is an exact fixed
    // point; the clamp keeps rounding from leaving the segment.
    const double v = t + (1.0 - rate) * (s - t);
    out[i] = std::clamp(v, std::min(t, s), std::max(t, s));
  }
  return ParamVector(std::move(out));
}

}  // namespace pslabel

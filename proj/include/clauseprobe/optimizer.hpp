/* Copyright 2026 The clauseprobe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CLAUSEPROBE_OPTIMIZER_HPP_
#define CLAUSEPROBE_OPTIMIZER_HPP_

#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace clauseprobe {

enum class OptimizerKind { kSgd, kAdam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

// Applies one update to a fixed, ordered list of tensors. The list must have
// the same shapes on every call; Adam keeps per-tensor moment state.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate);

  void step(const std::vector<Eigen::MatrixXd*>& params,
            const std::vector<const Eigen::MatrixXd*>& grads);

 private:
  OptimizerKind kind_;
  double lr_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double epsilon_ = 1e-8;
  long steps_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

}  // namespace clauseprobe

#endif  // CLAUSEPROBE_OPTIMIZER_HPP_

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

// Independent oracles shared by the unit tests and the acceptance suite.

#ifndef CLAUSEPROBE_TESTS_ORACLES_HPP_
#define CLAUSEPROBE_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "clauseprobe/probe.hpp"
#include "clauseprobe/rng.hpp"

namespace clauseprobe::testing {

// Two Gaussian blobs (unit variance) on either side of a random hyperplane
// through the origin. Points closer than `half_gap` to the plane are redrawn,
// so the classes are separated by a margin of 2 * half_gap.
inline std::vector<LabeledVector> make_blobs(Rng& rng, int dim, int n, double center,
                                             double half_gap) {
  Eigen::VectorXd u(dim);
  for (int i = 0; i < dim; ++i) u(i) = rng.normal(0.0, 1.0);
  u.normalize();
  std::vector<LabeledVector> out;
  for (int k = 0; k < n; ++k) {
    const bool sub = k % 2 == 1;
    Eigen::VectorXd x(dim);
    do {
      for (int i = 0; i < dim; ++i) x(i) = rng.normal(0.0, 1.0);
      x += (sub ? center : -center) * u;
    } while ((sub ? 1.0 : -1.0) * x.dot(u) < half_gap);
    out.push_back({x, sub ? ClauseLabel::kSub : ClauseLabel::kMain});
  }
  return out;
}

// Certificate of linear separability: some direction among the class-mean
// difference and the coordinate axes admits a threshold classifying every
// point correctly.
inline bool linearly_separable(const std::vector<LabeledVector>& data) {
  if (data.empty()) return true;
  const auto dim = data.front().x.size();
  Eigen::VectorXd mean_sub = Eigen::VectorXd::Zero(dim), mean_main = Eigen::VectorXd::Zero(dim);
  int n_sub = 0, n_main = 0;
  for (const auto& p : data) {
    if (p.label == ClauseLabel::kSub) {
      mean_sub += p.x;
      ++n_sub;
    } else {
      mean_main += p.x;
      ++n_main;
    }
  }
  if (n_sub == 0 || n_main == 0) return true;
  std::vector<Eigen::VectorXd> directions = {mean_sub / n_sub - mean_main / n_main};
  for (Eigen::Index i = 0; i < dim; ++i) directions.push_back(Eigen::VectorXd::Unit(dim, i));
  for (const auto& w : directions) {
    for (double sign : {1.0, -1.0}) {
      double max_main = -INFINITY, min_sub = INFINITY;
      for (const auto& p : data) {
        const double s = sign * w.dot(p.x);
        if (p.label == ClauseLabel::kSub) min_sub = std::min(min_sub, s);
        else max_main = std::max(max_main, s);
      }
      if (max_main < min_sub) return true;
    }
  }
  return false;
}

// Largest relative disagreement between analytic and central-difference
// gradients (parameters and inputs) for one random probe instance. Entries
// whose analytic and numeric values are both below `floor` in magnitude are
// compared absolutely against it instead.
inline double probe_gradient_error(Rng& rng, double step = 1e-5, double floor = 1e-7) {
  const int dim = 1 + static_cast<int>(rng.below(8));
  const int hidden = 1 + static_cast<int>(rng.below(8));
  const int batch = 1 + static_cast<int>(rng.below(5));
  ProbeParams p = zero_probe(dim, hidden);
  for (auto* m : p.tensors()) {
    for (Eigen::Index i = 0; i < m->size(); ++i) (*m)(i) = rng.uniform(-1.0, 1.0);
  }
  std::vector<LabeledVector> data;
  for (int b = 0; b < batch; ++b) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = rng.uniform(-2.0, 2.0);
    data.push_back({x, rng.bernoulli(0.5) ? ClauseLabel::kSub : ClauseLabel::kMain});
  }
  ProbeParams grads;
  std::vector<Eigen::VectorXd> input_grads;
  loss_and_grad(data, p, &grads, &input_grads);

  double worst = 0.0;
  auto compare = [&](double analytic, double numeric) {
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    worst = std::max(worst, std::abs(analytic - numeric) / std::max(scale, floor));
  };
  auto numeric_at = [&](double& slot) {
    const double orig = slot;
    slot = orig + step;
    const double up = loss_and_grad(data, p, nullptr);
    slot = orig - step;
    const double down = loss_and_grad(data, p, nullptr);
    slot = orig;
    return (up - down) / (2.0 * step);
  };
  auto params = p.tensors();
  const auto g = std::as_const(grads).tensors();
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (Eigen::Index i = 0; i < params[t]->size(); ++i) {
      compare((*g[t])(i), numeric_at((*params[t])(i)));
    }
  }
  for (std::size_t b = 0; b < data.size(); ++b) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      compare(input_grads[b](i), numeric_at(data[b].x(i)));
    }
  }
  return worst;
}

}  // namespace clauseprobe::testing

#endif  // CLAUSEPROBE_TESTS_ORACLES_HPP_

// Copyright 2026 The TAC Authors
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

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tac/random.hpp"

namespace tac::replay {

// Binary tree of partial sums over a fixed number of leaves. Parents are
// recomputed from their children on every write, so totals never drift.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  void set(std::size_t leaf, double value);
  double get(std::size_t leaf) const { return nodes_[base_ + leaf]; }
  double total() const { return nodes_[1]; }
  // Leaf whose cumulative interval contains mass ∈ [0, total()).
  std::size_t find(double mass) const;

 private:
  std::size_t capacity_;
  std::size_t base_;
  std::vector<double> nodes_;
};

inline constexpr double kPriorityEpsilon = 1e-3;

struct PerOptions {
  std::size_t capacity = 100000;
  double alpha = 0.7;
  double beta = 0.3;
  double priority_epsilon = kPriorityEpsilon;
};

template <typename T>
struct PerSample {
  std::vector<const T*> items;
  std::vector<std::uint64_t> indices;  // insertion serials, stable across evictions
  std::vector<double> weights;
  std::vector<double> probabilities;
};

// Proportional prioritized replay over a FIFO ring. New items take their
// priority from the TD error supplied at insertion.
template <typename T>
class PerBuffer {
 public:
  explicit PerBuffer(PerOptions options)
      : options_(options), tree_(options.capacity) {
    if (options.capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    if (options.alpha < 0) throw std::invalid_argument("replay alpha must be nonnegative");
    if (!(options.priority_epsilon > 0)) throw std::invalid_argument("replay priority epsilon must be positive");
    slots_.reserve(std::min<std::size_t>(options.capacity, 1 << 16));
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return options_.capacity; }
  const PerOptions& options() const { return options_; }
  double total_priority() const { return tree_.total(); }

  double priority(double td_error) const {
    return std::pow(std::fabs(td_error) + options_.priority_epsilon, options_.alpha);
  }

  std::uint64_t insert(T item, double td_error) {
    if (!std::isfinite(td_error)) throw std::invalid_argument("replay insert: non-finite TD error");
    const std::size_t slot = next_serial_ % options_.capacity;
    if (slot < slots_.size()) {
      slots_[slot] = std::move(item);
    } else {
      slots_.push_back(std::move(item));
    }
    tree_.set(slot, priority(td_error));
    if (size_ < options_.capacity) ++size_;
    return next_serial_++;
  }

  // Priority of a resident item, nullopt if evicted or never inserted.
  std::optional<double> stored_priority(std::uint64_t index) const {
    if (!resident(index)) return std::nullopt;
    return tree_.get(index % options_.capacity);
  }

  bool resident(std::uint64_t index) const {
    return index < next_serial_ && next_serial_ - index <= size_;
  }

  const T& at(std::uint64_t index) const {
    if (!resident(index)) throw std::out_of_range("replay item " + std::to_string(index) + " is not resident");
    return slots_[index % options_.capacity];
  }

  PerSample<T> sample(std::size_t batch_size, double beta, Rng& rng) const {
    if (batch_size == 0) throw std::invalid_argument("replay sample: batch size must be positive");
    if (size_ < batch_size) {
      throw std::runtime_error("replay sample: buffer holds " + std::to_string(size_) + " item(s), need " +
                               std::to_string(batch_size));
    }
    PerSample<T> out;
    const double total = tree_.total();
    double max_w = 0;
    for (std::size_t k = 0; k < batch_size; ++k) {
      const std::size_t slot = tree_.find(uniform01(rng) * total);
      const double p = tree_.get(slot) / total;
      const double w = std::pow(static_cast<double>(size_) * p, -beta);
      max_w = std::max(max_w, w);
      out.items.push_back(&slots_[slot]);
      out.indices.push_back(serial_of(slot));
      out.probabilities.push_back(p);
      out.weights.push_back(w);
    }
    for (double& w : out.weights) w /= max_w;
    return out;
  }

  PerSample<T> sample(std::size_t batch_size, Rng& rng) const { return sample(batch_size, options_.beta, rng); }

  // Evicted indices are skipped.
  void update_priorities(const std::vector<std::uint64_t>& indices, const std::vector<double>& td_errors) {
    if (indices.size() != td_errors.size()) throw std::invalid_argument("update_priorities: length mismatch");
    for (std::size_t k = 0; k < indices.size(); ++k) {
      if (!resident(indices[k]) || !std::isfinite(td_errors[k])) continue;
      tree_.set(indices[k] % options_.capacity, priority(td_errors[k]));
    }
  }

 private:
  std::uint64_t serial_of(std::size_t slot) const {
    // The newest serial stored in `slot`.
    const std::uint64_t cap = options_.capacity;
    const std::uint64_t last = next_serial_ - 1;
    const std::uint64_t back = (last % cap + cap - slot) % cap;
    return last - back;
  }

  PerOptions options_;
  SumTree tree_;
  std::vector<T> slots_;
  std::size_t size_ = 0;
  std::uint64_t next_serial_ = 0;
};

}  // namespace tac::replay

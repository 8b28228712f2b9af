#include "tcl/memory_bank.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "tcl/check.hpp"
#include "tcl/text.hpp"

namespace tcl {

MemoryBank::MemoryBank(std::size_t capacity, std::size_t dim, int num_classes)
    : capacity_(capacity), dim_(dim), num_classes_(num_classes) {
  check_arg(capacity > 0, "memory bank: capacity must be positive");
  check_arg(dim > 0, "memory bank: key dim must be positive");
  check_arg(num_classes > 0, "memory bank: class count must be positive");
  ring_.resize(capacity);
}

void MemoryBank::enqueue(const Tensor& keys, const std::vector<int>& labels) {
  check_arg(keys.rank() == 2 && keys.cols() == dim_,
            "memory bank: keys must be b x " + std::to_string(dim_) + ", got " + shape_str(keys));
  const std::size_t b = keys.rows();
  check_arg(b == labels.size(), "memory bank: one label per key required");
  check_arg(b <= capacity_, "memory bank: batch larger than capacity");
  for (std::size_t i = 0; i < b; ++i) {
    check_arg(labels[i] >= 0 && labels[i] < num_classes_,
              "memory bank: label out of range: " + std::to_string(labels[i]));
    double sq = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) sq += keys.at(i, j) * keys.at(i, j);
    check_arg(std::abs(std::sqrt(sq) - 1.0) <= 1e-6,
              "memory bank: key row " + std::to_string(i) + " is not unit-norm");
  }
  for (std::size_t i = 0; i < b; ++i) {
    MemoryEntry e;
    e.key.assign(keys.values.begin() + i * dim_, keys.values.begin() + (i + 1) * dim_);
    e.label = labels[i];
    e.step = step_++;
    if (size_ < capacity_) {
      ring_[(head_ + size_) % capacity_] = std::move(e);
      ++size_;
    } else {
      ring_[head_] = std::move(e);
      head_ = (head_ + 1) % capacity_;
    }
  }
}

const MemoryEntry& MemoryBank::entry(std::size_t i) const {
  check_arg(i < size_, "memory bank: entry index out of range");
  return ring_[(head_ + i) % capacity_];
}

MemoryBank::View MemoryBank::snapshot() const {
  View v;
  v.keys = Tensor::zeros({size_, dim_});
  v.labels.reserve(size_);
  v.steps.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) {
    const MemoryEntry& e = entry(i);
    for (std::size_t j = 0; j < dim_; ++j) v.keys.at(i, j) = e.key[j];
    v.labels.push_back(e.label);
    v.steps.push_back(e.step);
  }
  return v;
}

MemoryBank::View MemoryBank::select_by_label(int c, bool match) const {
  std::vector<std::size_t> pick;
  for (std::size_t i = 0; i < size_; ++i)
    if ((entry(i).label == c) == match) pick.push_back(i);
  View v;
  v.keys = Tensor::zeros({pick.size(), dim_});
  v.labels.reserve(pick.size());
  v.steps.reserve(pick.size());
  for (std::size_t r = 0; r < pick.size(); ++r) {
    const MemoryEntry& e = entry(pick[r]);
    for (std::size_t j = 0; j < dim_; ++j) v.keys.at(r, j) = e.key[j];
    v.labels.push_back(e.label);
    v.steps.push_back(e.step);
  }
  return v;
}

void dump_memory_csv(std::ostream& os, const MemoryBank& bank, int domain_id) {
  os << "step,domain,label";
  for (std::size_t j = 0; j < bank.dim(); ++j) os << ",k_" << j;
  os << "\n";
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const MemoryEntry& e = bank.entry(i);
    os << e.step << "," << domain_id << "," << e.label;
    for (std::size_t j = 0; j < bank.dim(); ++j) os << "," << fmt_double(e.key[j]);
    os << "\n";
  }
}

}  // namespace tcl

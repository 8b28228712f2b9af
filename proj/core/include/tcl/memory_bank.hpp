#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tcl/tensor.hpp"

namespace tcl {

struct MemoryEntry {
  std::vector<double> key;  // unit-norm, proj_dim wide
  int label = -1;
  std::uint64_t step = 0;   // monotone enqueue counter, never reused
};

// Fixed-capacity FIFO of labeled keys, one bank per domain. Entries are
// immutable once stored; refreshing a sample's key means enqueueing it again
// and letting the old copy age out.
class MemoryBank {
 public:
  MemoryBank(std::size_t capacity, std::size_t dim, int num_classes);

  // keys is b x dim with unit-norm rows (validated to 1e-6); one label per
  // row. b may not exceed capacity.
  void enqueue(const Tensor& keys, const std::vector<int>& labels);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t dim() const { return dim_; }
  int num_classes() const { return num_classes_; }
  std::uint64_t next_step() const { return step_; }

  // i = 0 is the oldest entry
  const MemoryEntry& entry(std::size_t i) const;

  struct View {
    Tensor keys;  // k x dim, oldest first
    std::vector<int> labels;
    std::vector<std::uint64_t> steps;
  };

  View snapshot() const;

  // match=true selects entries with label == c (positives for class c),
  // match=false selects label != c (negatives). Oldest first.
  View select_by_label(int c, bool match) const;

 private:
  std::size_t capacity_, dim_;
  int num_classes_;
  std::vector<MemoryEntry> ring_;
  std::size_t head_ = 0;  // index of the oldest entry
  std::size_t size_ = 0;
  std::uint64_t step_ = 0;
};

// step,domain,label,k_0..k_{d-1}; one row per entry, oldest first
void dump_memory_csv(std::ostream& os, const MemoryBank& bank, int domain_id);

}  // namespace tcl

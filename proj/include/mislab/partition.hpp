#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mislab {

class PartitionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// P disjoint, equally sized subsets of proposal indices {0..N-1} whose union is
/// every index. Subsets keep their position; members are stored ascending so
/// that two partitions with the same subsets sum mixture terms in the same order.
class Partition {
 public:
  Partition(std::vector<std::vector<std::size_t>> subsets, std::size_t num_proposals);

  /// {{0}, {1}, ..., {N-1}}.
  static Partition singletons(std::size_t num_proposals);
  /// {{0, 1, ..., N-1}}.
  static Partition whole(std::size_t num_proposals);

  std::size_t num_proposals() const { return subset_of_.size(); }
  std::size_t num_subsets() const { return subsets_.size(); }
  std::size_t subset_size() const { return subsets_.front().size(); }

  const std::vector<std::vector<std::size_t>>& subsets() const { return subsets_; }
  const std::vector<std::size_t>& subset(std::size_t p) const { return subsets_.at(p); }
  std::size_t subset_of(std::size_t proposal) const { return subset_of_.at(proposal); }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<std::vector<std::size_t>> subsets_;
  std::vector<std::size_t> subset_of_;
};

}  // namespace mislab

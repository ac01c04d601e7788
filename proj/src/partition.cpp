#include "mislab/partition.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace mislab {

Partition::Partition(std::vector<std::vector<std::size_t>> subsets, std::size_t num_proposals)
    : subsets_(std::move(subsets)) {
  if (num_proposals == 0 || subsets_.empty()) {
    throw PartitionError("partition needs at least one proposal and one subset");
  }
  const std::size_t m = subsets_.front().size();
  if (m == 0 || subsets_.size() * m != num_proposals) {
    throw PartitionError("partition subsets must be non-empty with P * M = N");
  }
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  subset_of_.assign(num_proposals, unset);
  for (std::size_t p = 0; p < subsets_.size(); ++p) {
    auto& s = subsets_[p];
    if (s.size() != m) {
      throw PartitionError("partition subsets must all have size " + std::to_string(m));
    }
    std::sort(s.begin(), s.end());
    for (std::size_t j : s) {
      if (j >= num_proposals) {
        throw PartitionError("proposal index " + std::to_string(j) + " out of range");
      }
      if (subset_of_[j] != unset) {
        throw PartitionError("proposal index " + std::to_string(j) + " appears twice");
      }
      subset_of_[j] = p;
    }
  }
}

Partition Partition::singletons(std::size_t num_proposals) {
  std::vector<std::vector<std::size_t>> subsets(num_proposals);
  for (std::size_t j = 0; j < num_proposals; ++j) {
    subsets[j] = {j};
  }
  return Partition(std::move(subsets), num_proposals);
}

Partition Partition::whole(std::size_t num_proposals) {
  std::vector<std::size_t> all(num_proposals);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return Partition({std::move(all)}, num_proposals);
}

}  // namespace mislab

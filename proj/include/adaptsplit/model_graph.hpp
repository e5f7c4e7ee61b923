#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adaptsplit {

/// One atomic unit of the model chain (an embedding, a group of transformer
/// layers, an output head). Costs are per request.
struct Block {
  std::size_t index = 0;
  double work_gflop = 0.0;
  double param_bytes = 0.0;
  double activation_out_bytes = 0.0;
  bool privacy_critical = false;
  double sensitivity = 0.0;  // 0 = public, 1 = raw user data
};

struct ModelSpec {
  std::string name;
  std::vector<Block> blocks;
  std::size_t k_max = 1;
  /// Size of the response returned to the requester. Defaults to the last
  /// block's activation size.
  std::optional<double> output_bytes;

  std::size_t size() const { return blocks.size(); }
  double final_output_bytes() const;
};

struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationResult validate_model(const ModelSpec& spec);

/// Half-open range of block indices [begin, end).
struct BlockRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const BlockRange&) const = default;
};

/// A contiguous segmentation of the block chain, described by its cut points.
/// Cut point c separates block c-1 from block c.
class SplitScheme {
 public:
  SplitScheme() = default;
  /// Throws PreconditionError unless cuts are strictly increasing in (0, num_blocks).
  SplitScheme(std::size_t num_blocks, std::vector<std::size_t> cut_points);

  static SplitScheme whole(std::size_t num_blocks) { return SplitScheme(num_blocks, {}); }

  std::size_t num_blocks() const { return num_blocks_; }
  std::size_t partition_count() const { return cuts_.size() + 1; }
  std::span<const std::size_t> cut_points() const { return cuts_; }

  /// Partition j, 0-based.
  BlockRange partition(std::size_t j) const;
  std::size_t partition_of_block(std::size_t block) const;

  bool operator==(const SplitScheme&) const = default;

 private:
  std::size_t num_blocks_ = 0;
  std::vector<std::size_t> cuts_;
};

/// Tie-break order over schemes: fewer partitions first, then
/// lexicographically smaller cut points.
bool scheme_precedes(const SplitScheme& a, const SplitScheme& b);

/// Every segmentation into 1..max_k partitions, in scheme_precedes order.
/// Requires 1 <= max_k <= spec.k_max.
std::vector<SplitScheme> enumerate_splits(const ModelSpec& spec, std::size_t max_k);

/// Closed form sum_{k=1..max_k} C(num_blocks-1, k-1).
std::uint64_t count_splits(std::size_t num_blocks, std::size_t max_k);

struct PartitionStats {
  double work_gflop = 0.0;
  double param_bytes = 0.0;
  double boundary_activation_bytes = 0.0;
  double max_sensitivity = 0.0;
  bool privacy_critical = false;
};

/// Aggregates for partition j (0-based). The last partition's boundary
/// activation is the model output returned to the requester.
PartitionStats partition_stats(const ModelSpec& spec, const SplitScheme& scheme, std::size_t j);

}  // namespace adaptsplit

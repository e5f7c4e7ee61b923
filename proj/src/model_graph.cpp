#include "adaptsplit/model_graph.hpp"

#include <algorithm>
#include <fmt/core.h>

#include "adaptsplit/errors.hpp"

namespace adaptsplit {

double ModelSpec::final_output_bytes() const {
  if (output_bytes) return *output_bytes;
  return blocks.empty() ? 0.0 : blocks.back().activation_out_bytes;
}

ValidationResult validate_model(const ModelSpec& spec) {
  ValidationResult result;
  auto& v = result.violations;
  if (spec.blocks.empty()) v.push_back("model has no blocks");
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    const Block& b = spec.blocks[i];
    if (b.index != i) v.push_back(fmt::format("block index gap: expected {} found {}", i, b.index));
    if (!(b.work_gflop >= 0)) v.push_back(fmt::format("negative work at index {}", i));
    if (!(b.param_bytes >= 0)) v.push_back(fmt::format("negative param bytes at index {}", i));
    if (!(b.activation_out_bytes >= 0)) v.push_back(fmt::format("negative activation bytes at index {}", i));
    if (!(b.sensitivity >= 0 && b.sensitivity <= 1))
      v.push_back(fmt::format("sensitivity outside [0,1] at index {}", i));
    if (b.privacy_critical && !(b.sensitivity > 0))
      v.push_back(fmt::format("privacy-critical block {} has zero sensitivity", i));
  }
  if (spec.k_max < 1) v.push_back("k_max below 1");
  if (!spec.blocks.empty() && spec.k_max > spec.blocks.size())
    v.push_back(fmt::format("k_max {} exceeds block count {}", spec.k_max, spec.blocks.size()));
  if (spec.output_bytes && !(*spec.output_bytes >= 0)) v.push_back("negative output size");
  return result;
}

SplitScheme::SplitScheme(std::size_t num_blocks, std::vector<std::size_t> cut_points)
    : num_blocks_(num_blocks), cuts_(std::move(cut_points)) {
  if (num_blocks_ == 0) throw PreconditionError("split scheme over zero blocks");
  for (std::size_t i = 0; i < cuts_.size(); ++i) {
    if (cuts_[i] == 0 || cuts_[i] >= num_blocks_)
      throw PreconditionError(fmt::format("cut point {} outside (0, {})", cuts_[i], num_blocks_));
    if (i > 0 && cuts_[i] <= cuts_[i - 1]) throw PreconditionError("cut points not strictly increasing");
  }
}

BlockRange SplitScheme::partition(std::size_t j) const {
  if (j > cuts_.size()) throw PreconditionError(fmt::format("partition {} out of range", j));
  const std::size_t begin = j == 0 ? 0 : cuts_[j - 1];
  const std::size_t end = j == cuts_.size() ? num_blocks_ : cuts_[j];
  return {begin, end};
}

std::size_t SplitScheme::partition_of_block(std::size_t block) const {
  if (block >= num_blocks_) throw PreconditionError(fmt::format("block {} out of range", block));
  return static_cast<std::size_t>(std::upper_bound(cuts_.begin(), cuts_.end(), block) - cuts_.begin());
}

bool scheme_precedes(const SplitScheme& a, const SplitScheme& b) {
  if (a.partition_count() != b.partition_count()) return a.partition_count() < b.partition_count();
  const auto ca = a.cut_points();
  const auto cb = b.cut_points();
  return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
}

std::vector<SplitScheme> enumerate_splits(const ModelSpec& spec, std::size_t max_k) {
  const std::size_t n = spec.blocks.size();
  if (n == 0) throw PreconditionError("model has no blocks");
  if (max_k < 1 || max_k > spec.k_max)
    throw PreconditionError(fmt::format("max_k {} outside [1, {}]", max_k, spec.k_max));

  std::vector<SplitScheme> out;
  const std::size_t top = std::min(max_k, n);
  for (std::size_t k = 1; k <= top; ++k) {
    const std::size_t cuts = k - 1;
    // Lexicographic combinations of `cuts` values from 1..n-1.
    std::vector<std::size_t> c(cuts);
    for (std::size_t i = 0; i < cuts; ++i) c[i] = i + 1;
    while (true) {
      out.emplace_back(n, c);
      if (cuts == 0) break;
      std::size_t i = cuts;
      while (i > 0 && c[i - 1] == n - 1 - (cuts - i)) --i;
      if (i == 0) break;
      ++c[i - 1];
      for (std::size_t j = i; j < cuts; ++j) c[j] = c[j - 1] + 1;
    }
  }
  return out;
}

std::uint64_t count_splits(std::size_t num_blocks, std::size_t max_k) {
  if (num_blocks == 0) return 0;
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(num_blocks-1, k-1)
  for (std::size_t k = 1; k <= max_k && k <= num_blocks; ++k) {
    total += binom;
    binom = binom * (num_blocks - k) / k;
  }
  return total;
}

PartitionStats partition_stats(const ModelSpec& spec, const SplitScheme& scheme, std::size_t j) {
  if (j >= scheme.partition_count())
    throw PreconditionError(fmt::format("partition {} out of range (k = {})", j, scheme.partition_count()));
  if (scheme.num_blocks() != spec.blocks.size()) throw PreconditionError("scheme does not match model");
  const BlockRange r = scheme.partition(j);
  PartitionStats s;
  for (std::size_t b = r.begin; b < r.end; ++b) {
    const Block& blk = spec.blocks[b];
    s.work_gflop += blk.work_gflop;
    s.param_bytes += blk.param_bytes;
    s.max_sensitivity = std::max(s.max_sensitivity, blk.sensitivity);
    s.privacy_critical = s.privacy_critical || blk.privacy_critical;
  }
  s.boundary_activation_bytes =
      j + 1 == scheme.partition_count() ? spec.final_output_bytes() : spec.blocks[r.end - 1].activation_out_bytes;
  return s;
}

}  // namespace adaptsplit

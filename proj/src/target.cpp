#include "tsmh/target.hpp"

#include <algorithm>
#include <cmath>

namespace tsmh {

namespace {
constexpr std::size_t kCacheLimit = 1 << 18;
}

Target::Target(const CategoryPartition& partition, const ConstraintSet& constraints, const LmBackend& lm,
               SoftScorerPtr soft)
    : partition_(&partition), constraints_(&constraints), lm_(&lm), soft_(std::move(soft)) {}

const Target::Entry& Target::entry(const Sentence& x) {
  if (auto it = cache_.find(x); it != cache_.end()) return it->second;
  if (cache_.size() >= kCacheLimit) cache_.clear();
  Entry e;
  e.lm = lm_->sentence_logscore(x.tokens);
  e.soft = soft_ ? std::log(std::max(soft_->score(x), kSoftFloor)) : 0.0;
  e.error = constraints_->error(x, *partition_);
  return cache_.emplace(x, e).first->second;
}

}  // namespace tsmh

#pragma once

#include <unordered_map>

#include "tsmh/lm.hpp"
#include "tsmh/logic.hpp"
#include "tsmh/soft.hpp"

namespace tsmh {

/// The unnormalized stationary distribution
///
///   log pi(x) = log P_LM(x) + C(x) log beta + log Phi_soft(x)
///
/// with memoized per-sentence scores. Not thread-safe; use one per chain.
/// Soft scores below kSoftFloor are clamped so log pi stays finite.
class Target {
 public:
  static constexpr double kSoftFloor = 1e-12;

  Target(const CategoryPartition& partition, const ConstraintSet& constraints, const LmBackend& lm,
         SoftScorerPtr soft = nullptr);

  const CategoryPartition& partition() const { return *partition_; }
  const ConstraintSet& constraints() const { return *constraints_; }
  const LmBackend& lm() const { return *lm_; }

  double lm_score(const Sentence& x) { return entry(x).lm; }
  double log_soft(const Sentence& x) { return entry(x).soft; }
  int error(const Sentence& x) { return entry(x).error; }
  /// log P_LM(x) + log Phi_soft(x): the template-selection weight.
  double weight(const Sentence& x) {
    const Entry& e = entry(x);
    return e.lm + e.soft;
  }
  double log_pi(const Sentence& x) {
    const Entry& e = entry(x);
    return e.lm + e.soft + constraints_->log_hard_score(e.error);
  }

  void clear_cache() { cache_.clear(); }

 private:
  struct Entry {
    double lm;
    double soft;
    int error;
  };
  const Entry& entry(const Sentence& x);

  const CategoryPartition* partition_;
  const ConstraintSet* constraints_;
  const LmBackend* lm_;
  SoftScorerPtr soft_;
  std::unordered_map<Sentence, Entry, SentenceHash> cache_;
};

}  // namespace tsmh

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "binyard/rng.hpp"

namespace binyard {

/// Softmax distribution over logits with optional admissibility mask.
/// Masked entries have probability exactly 0 and log-probability -inf.
class Categorical {
 public:
  /// Throws std::invalid_argument if every action is masked or a logit is not finite.
  explicit Categorical(std::span<const double> logits, const std::vector<bool>& mask = {});

  std::size_t size() const { return probs_.size(); }
  std::span<const double> probs() const { return probs_; }
  std::span<const double> log_probs() const { return log_probs_; }

  double log_prob(int action) const;
  double entropy() const;
  /// KL(this || other) = sum over support of this of p (ln p - ln q).
  double kl_to(const Categorical& other) const;

  int sample(Rng& rng) const;
  /// Most likely admissible action, lowest index on ties.
  int mode() const;

 private:
  std::vector<double> probs_;
  std::vector<double> log_probs_;
};

}  // namespace binyard

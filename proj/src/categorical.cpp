#include "binyard/categorical.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace binyard {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Categorical::Categorical(std::span<const double> logits, const std::vector<bool>& mask) {
  const std::size_t n = logits.size();
  if (n == 0) throw std::invalid_argument("categorical: empty logits");
  if (!mask.empty() && mask.size() != n) throw std::invalid_argument("categorical: mask length mismatch");
  auto allowed = [&](std::size_t i) { return mask.empty() || mask[i]; };

  double max_logit = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(logits[i])) throw std::invalid_argument("categorical: non-finite logit");
    if (allowed(i)) max_logit = std::max(max_logit, logits[i]);
  }
  if (max_logit == kNegInf) throw std::invalid_argument("categorical: every action is masked");

  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (allowed(i)) z += std::exp(logits[i] - max_logit);
  const double log_z = max_logit + std::log(z);

  probs_.assign(n, 0.0);
  log_probs_.assign(n, kNegInf);
  for (std::size_t i = 0; i < n; ++i) {
    if (!allowed(i)) continue;
    log_probs_[i] = logits[i] - log_z;
    probs_[i] = std::exp(log_probs_[i]);
  }
}

double Categorical::log_prob(int action) const {
  if (action < 0 || static_cast<std::size_t>(action) >= size()) throw std::out_of_range("categorical: action out of range");
  return log_probs_[action];
}

double Categorical::entropy() const {
  double h = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    if (probs_[i] > 0.0) h -= probs_[i] * log_probs_[i];
  return h;
}

double Categorical::kl_to(const Categorical& other) const {
  if (other.size() != size()) throw std::invalid_argument("categorical: KL between different sizes");
  double kl = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (probs_[i] <= 0.0) continue;
    kl += probs_[i] * (log_probs_[i] - other.log_probs_[i]);
  }
  return kl;
}

int Categorical::sample(Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  double acc = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < size(); ++i) {
    if (probs_[i] <= 0.0) continue;
    acc += probs_[i];
    last = static_cast<int>(i);
    if (r < acc) return last;
  }
  return last;  // rounding left r >= acc: the last admissible action
}

int Categorical::mode() const {
  int best = -1;
  for (std::size_t i = 0; i < size(); ++i)
    if (probs_[i] > 0.0 && (best < 0 || probs_[i] > probs_[best])) best = static_cast<int>(i);
  return best;
}

}  // namespace binyard

#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "rexlab/common.hpp"

namespace rexlab {

inline constexpr double kEquilibriumTol = 1e-9;

/// Finite distribution over prices. Support is ascending with strictly
/// positive mass everywhere (zeros are pruned on construction), so the
/// lowest support point always carries probability.
struct DiscreteDistribution {
  std::vector<double> support;
  std::vector<double> probs;

  /// Sorts, merges duplicate support values, prunes zero-mass points and
  /// validates that the mass sums to 1 within 1e-12.
  static DiscreteDistribution from_mass(std::vector<std::pair<double, double>> mass) {
    std::map<double, double> merged;
    for (const auto& [value, p] : mass) {
      if (!std::isfinite(value)) throw input_error("distribution: non-finite support value");
      if (p < 0) throw input_error("distribution: negative probability");
      merged[value] += p;
    }
    DiscreteDistribution d;
    for (const auto& [value, p] : merged) {
      if (p == 0.0) continue;
      d.support.push_back(value);
      d.probs.push_back(p);
    }
    d.validate();
    return d;
  }

  static DiscreteDistribution point_mass(double value) { return from_mass({{value, 1.0}}); }

  void validate() const {
    if (support.empty()) throw input_error("distribution: empty support");
    if (support.size() != probs.size()) throw input_error("distribution: size mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (i > 0 && !(support[i] > support[i - 1])) {
        throw input_error("distribution: support must be strictly ascending");
      }
      if (!(probs[i] > 0)) throw input_error("distribution: probabilities must be positive");
      sum += probs[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw input_error("distribution: probabilities sum to " + double_to_string(sum));
    }
  }

  double min() const { return support.front(); }
  double max() const { return support.back(); }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) m += probs[i] * support[i];
    return m;
  }
};

/// Receiver-side belief about the price after a quiet message.
using Belief = DiscreteDistribution;

/// Probability of revealing each support value (else staying quiet), aligned
/// with the prior's support.
struct SenderStrategy {
  std::vector<double> reveal_prob;

  void validate_against(const DiscreteDistribution& prior) const {
    if (reveal_prob.size() != prior.support.size()) {
      throw input_error("sender strategy: size does not match prior support");
    }
    for (double p : reveal_prob) {
      if (p < 0.0 || p > 1.0) throw input_error("sender strategy: probability outside [0, 1]");
    }
  }
};

/// The response to a revealed price is the identity; only the quiet response
/// is a free parameter, constrained to [min, max].
struct ReceiverStrategy {
  double on_quiet = 0.0;

  void validate_against(const DiscreteDistribution& prior) const {
    if (on_quiet < prior.min() || on_quiet > prior.max()) {
      throw input_error("receiver strategy: quiet response outside [min, max]");
    }
  }
};

struct PBEResult {
  SenderStrategy sender;
  ReceiverStrategy receiver;
  Belief quiet_belief;
  bool sender_indifferent_at_min = false;
};

/// Against quadratic loss -(a - Y)^2 the optimal estimate is E[Y].
inline double receiver_best_response(const Belief& belief) {
  belief.validate();
  return belief.mean();
}

/// The unique equilibrium outcome: every price above the minimum is revealed,
/// quiet is answered with the minimum, and the quiet belief is a point mass
/// there. The action at x = min is payoff-indifferent; this implementation
/// resolves it to "reveal".
inline PBEResult compute_pbe(const DiscreteDistribution& prior) {
  prior.validate();
  PBEResult result;
  result.sender.reveal_prob.assign(prior.support.size(), 1.0);
  result.receiver.on_quiet = prior.min();
  result.quiet_belief = Belief::point_mass(prior.min());
  result.sender_indifferent_at_min = true;
  return result;
}

struct PBEVerdict {
  bool sender_best_response = true;
  bool receiver_best_response = true;
  bool belief_consistent = true;
  std::vector<std::string> violations;

  bool ok() const { return sender_best_response && receiver_best_response && belief_consistent; }
};

/// Checks the three equilibrium conditions: sender optimality state by state,
/// receiver optimality against the quiet belief, and Bayes consistency of the
/// quiet belief whenever quiet has positive probability.
inline PBEVerdict verify_pbe(const DiscreteDistribution& prior, const SenderStrategy& sender,
                             const ReceiverStrategy& receiver, const Belief& quiet_belief) {
  prior.validate();
  sender.validate_against(prior);
  receiver.validate_against(prior);
  quiet_belief.validate();

  PBEVerdict verdict;

  // (1) Sender: revealing x earns x, quiet earns the receiver's quiet action.
  for (std::size_t i = 0; i < prior.support.size(); ++i) {
    const double x = prior.support[i];
    const double r = sender.reveal_prob[i];
    const double achieved = r * x + (1.0 - r) * receiver.on_quiet;
    const double best = std::max(x, receiver.on_quiet);
    if (achieved < best - kEquilibriumTol) {
      verdict.sender_best_response = false;
      verdict.violations.push_back("sender not best responding at x = " + double_to_string(x) +
                                   ": achieves " + double_to_string(achieved) + " but " +
                                   double_to_string(best) + " is available");
    }
  }

  // (2) Receiver: quiet response must be the mean of the quiet belief.
  const double best_quiet = quiet_belief.mean();
  if (std::abs(receiver.on_quiet - best_quiet) > kEquilibriumTol) {
    verdict.receiver_best_response = false;
    verdict.violations.push_back("receiver quiet response " + double_to_string(receiver.on_quiet) +
                                 " is not the belief mean " + double_to_string(best_quiet));
  }

  // (3) Consistency: with positive quiet probability the belief must be the
  // Bayes posterior; otherwise Bayes rule does not bind.
  double quiet_mass = 0.0;
  for (std::size_t i = 0; i < prior.support.size(); ++i) {
    quiet_mass += prior.probs[i] * (1.0 - sender.reveal_prob[i]);
  }
  if (quiet_mass > 0.0) {
    std::map<double, double> diff;
    for (std::size_t i = 0; i < prior.support.size(); ++i) {
      const double posterior = prior.probs[i] * (1.0 - sender.reveal_prob[i]) / quiet_mass;
      if (posterior > 0.0) diff[prior.support[i]] += posterior;
    }
    for (std::size_t i = 0; i < quiet_belief.support.size(); ++i) {
      diff[quiet_belief.support[i]] -= quiet_belief.probs[i];
    }
    double tv = 0.0;
    for (const auto& [value, d] : diff) tv += std::abs(d);
    tv /= 2.0;
    if (tv > kEquilibriumTol) {
      verdict.belief_consistent = false;
      verdict.violations.push_back("quiet belief deviates from the Bayes posterior (TV = " +
                                   double_to_string(tv) + ")");
    }
  }
  return verdict;
}

/// The iterative collapse of partial disclosure: starting from the prior mean,
/// the sender hides exactly the prices below the current quiet response, the
/// receiver re-conditions, and the response falls until it reaches the
/// minimum. A price equal to the current response is revealed (indifference
/// resolves to disclosure).
inline std::vector<double> unravel(const DiscreteDistribution& prior, int max_iters = 0) {
  prior.validate();
  if (max_iters <= 0) max_iters = static_cast<int>(prior.support.size()) + 1;

  std::vector<double> responses{prior.mean()};
  for (int iter = 0; iter < max_iters; ++iter) {
    const double c = responses.back();
    double hidden_mass = 0.0, hidden_mean = 0.0;
    for (std::size_t i = 0; i < prior.support.size(); ++i) {
      if (prior.support[i] < c) {
        hidden_mass += prior.probs[i];
        hidden_mean += prior.probs[i] * prior.support[i];
      }
    }
    const double next = hidden_mass > 0.0 ? hidden_mean / hidden_mass : prior.min();
    if (next == c) return responses;
    responses.push_back(next);
  }
  throw input_error("unravel: no fixed point within " + std::to_string(max_iters) + " iterations");
}

struct ExpectedUtilities {
  double sender = 0.0;    // E[a2]
  double receiver = 0.0;  // E[-(a2 - x)^2]
};

/// Expected payoffs of an arbitrary strategy pair; revealed states incur zero
/// receiver loss because the response to a message is the identity.
inline ExpectedUtilities expected_utilities(const DiscreteDistribution& prior,
                                            const SenderStrategy& sender,
                                            const ReceiverStrategy& receiver) {
  prior.validate();
  sender.validate_against(prior);
  receiver.validate_against(prior);
  ExpectedUtilities u;
  for (std::size_t i = 0; i < prior.support.size(); ++i) {
    const double x = prior.support[i];
    const double p = prior.probs[i];
    const double r = sender.reveal_prob[i];
    u.sender += p * (r * x + (1.0 - r) * receiver.on_quiet);
    u.receiver -= p * (1.0 - r) * (receiver.on_quiet - x) * (receiver.on_quiet - x);
  }
  return u;
}

// ---------------------------------------------------------------------------
// Prior CSV: header `value,prob`.

inline constexpr const char* kPriorCsvHeader = "value,prob";

inline DiscreteDistribution load_prior(std::istream& in) {
  std::vector<std::pair<double, double>> mass;
  read_csv(in, kPriorCsvHeader, "prior", [&](int line_no, const std::vector<std::string>& f) {
    const std::string where = "prior line " + std::to_string(line_no);
    if (f.size() != 2) throw parse_error(where + ": expected 2 fields, got " + std::to_string(f.size()));
    mass.emplace_back(parse_double(f[0], where), parse_double(f[1], where));
  });
  return DiscreteDistribution::from_mass(std::move(mass));
}

inline void save_prior(const DiscreteDistribution& prior, std::ostream& out) {
  out << kPriorCsvHeader << "\n";
  for (std::size_t i = 0; i < prior.support.size(); ++i) {
    out << double_to_string(prior.support[i]) << ',' << double_to_string(prior.probs[i]) << "\n";
  }
}

}  // namespace rexlab

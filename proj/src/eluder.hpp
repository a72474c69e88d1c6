#pragma once

#include <optional>
#include <vector>

#include "hypothesis.hpp"
#include "mdp.hpp"

namespace prefts {

// Probability distribution over a finite ground set of points (state-action
// pairs in the Bellman case, abstract indices otherwise).
struct FiniteDistribution {
  std::vector<double> probs;

  int ground_size() const { return static_cast<int>(probs.size()); }
};

// Real-valued functions on the ground set, one vector per member.
struct ScalarFunctionClass {
  std::vector<std::vector<double>> members;

  int size() const { return static_cast<int>(members.size()); }
};

struct EluderCaps {
  int max_family = 8;
  int max_members = 64;
};

// Witnessed longest independent sequence. `sequence` holds indices into the
// distribution family; `witnesses[k]` is the member certifying that
// sequence[k] is eps_prime-independent of its predecessors. Sequences with a
// repeated distribution can never be independent (the predecessor sum already
// caps |E_mu f| at eps'), so the search's repetition-allowed and
// repetition-free answers coincide; both are recorded.
struct EluderCertificate {
  int dimension = 0;
  std::vector<int> sequence;
  std::vector<int> witnesses;
  double eps = 0.0;
  double eps_prime = 0.0;
  int dimension_without_repetition = 0;
};

struct IndependenceResult {
  bool independent = false;
  std::optional<int> witness;
};

// mu is eps-independent of the predecessors iff some member f has
// sqrt(sum_i (E_{nu_i} f)^2) <= eps and |E_mu f| > eps. The witness is the
// lowest such member index.
IndependenceResult is_independent(const ScalarFunctionClass& cls,
                                  const std::vector<FiniteDistribution>& predecessors,
                                  const FiniteDistribution& mu, double eps);

// Longest sequence of family elements, each eps'-independent of its
// predecessors for a common eps' >= eps. Exhaustive depth-first search; the
// feasible eps' values of a sequence form a finite union of half-open
// intervals whose endpoints are achievable |E_mu f| and partial-sum values,
// so the search tracks that set exactly. Deterministic: maximal length, then
// the lexicographically smallest sequence, with the smallest feasible eps'.
EluderCertificate de_dimension(const ScalarFunctionClass& cls,
                               const std::vector<FiniteDistribution>& family, double eps,
                               const EluderCaps& caps = {});

struct BeDimensionResult {
  int dimension = 0;  // sup over steps
  std::vector<EluderCertificate> per_step;
};

enum class DistributionFamily { kDelta, kGreedy };

// Bellman eluder dimension of the class over the MDP: per step h, the
// distributional eluder dimension of the residuals f_h - T_h f_{h+1} over
// either the point-mass family or the greedy-policy occupancy family.
// Duplicate residual vectors and duplicate distributions are collapsed
// before the cap check (semantics-preserving for both).
BeDimensionResult be_dimension(const HypothesisClass& cls, const EpisodicMdp& mdp,
                               DistributionFamily family_kind, double eps,
                               const EluderCaps& caps = {});

}  // namespace prefts

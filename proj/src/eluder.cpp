#include "eluder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "errors.hpp"

namespace prefts {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double expectation(const FiniteDistribution& nu, const std::vector<double>& f) {
  double e = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) e += nu.probs[i] * f[i];
  return e;
}

void validate_distribution(const FiniteDistribution& nu, int ground_size) {
  if (nu.ground_size() != ground_size) throw ConfigError("distribution ground set mismatch");
  double total = 0.0;
  for (double p : nu.probs) {
    if (p < 0.0) throw ConfigError("negative distribution probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("distribution does not sum to 1");
}

// Sorted disjoint union of half-open intervals [a, b).
using IntervalSet = std::vector<std::pair<double, double>>;

IntervalSet normalize(IntervalSet raw) {
  std::erase_if(raw, [](const auto& iv) { return !(iv.first < iv.second); });
  std::sort(raw.begin(), raw.end());
  IntervalSet out;
  for (const auto& iv : raw) {
    if (!out.empty() && iv.first <= out.back().second) {
      out.back().second = std::max(out.back().second, iv.second);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

IntervalSet intersect(const IntervalSet& a, const IntervalSet& b) {
  IntervalSet out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double lo = std::max(a[i].first, b[j].first);
    double hi = std::min(a[i].second, b[j].second);
    if (lo < hi) out.emplace_back(lo, hi);
    if (a[i].second < b[j].second) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

struct SearchState {
  const std::vector<std::vector<double>>* expect;  // [family][member]
  int family_size = 0;
  int member_count = 0;

  std::vector<int> sequence;

  int best_len = -1;
  std::vector<int> best_sequence;
  double best_eps_prime = 0.0;

  // Feasible eps' values for appending family element j given the
  // predecessor partial sums: union over members of [sqrt(ps_f), |E_jf|).
  IntervalSet step_feasible(int j, const std::vector<double>& partial_sq) const {
    IntervalSet raw;
    raw.reserve(member_count);
    for (int f = 0; f < member_count; ++f) {
      double lo = std::sqrt(partial_sq[f]);
      double hi = std::abs((*expect)[j][f]);
      if (lo < hi) raw.emplace_back(lo, hi);
    }
    return normalize(std::move(raw));
  }

  // partial_sq is rebuilt per node (no undo arithmetic) so its values are
  // bit-identical to a fresh front-to-back accumulation; the certified eps'
  // is one of those exact endpoints and re-verifies exactly.
  void dfs(const IntervalSet& feasible, const std::vector<double>& partial_sq) {
    int depth = static_cast<int>(sequence.size());
    if (depth > best_len) {  // first maximal sequence in DFS order is lex-smallest
      best_len = depth;
      best_sequence = sequence;
      best_eps_prime = feasible.front().first;
    }
    for (int j = 0; j < family_size; ++j) {
      IntervalSet next = intersect(feasible, step_feasible(j, partial_sq));
      if (next.empty()) continue;
      std::vector<double> extended(partial_sq);
      for (int f = 0; f < member_count; ++f) {
        double e = (*expect)[j][f];
        extended[f] += e * e;
      }
      sequence.push_back(j);
      dfs(next, extended);
      sequence.pop_back();
    }
  }
};

}  // namespace

IndependenceResult is_independent(const ScalarFunctionClass& cls,
                                  const std::vector<FiniteDistribution>& predecessors,
                                  const FiniteDistribution& mu, double eps) {
  if (eps < 0.0) throw ConfigError("is_independent needs eps >= 0");
  for (int f = 0; f < cls.size(); ++f) {
    double sum_sq = 0.0;
    for (const auto& nu : predecessors) {
      double e = expectation(nu, cls.members[f]);
      sum_sq += e * e;
    }
    if (std::sqrt(sum_sq) <= eps && std::abs(expectation(mu, cls.members[f])) > eps) {
      return {true, f};
    }
  }
  return {false, std::nullopt};
}

EluderCertificate de_dimension(const ScalarFunctionClass& cls,
                               const std::vector<FiniteDistribution>& family, double eps,
                               const EluderCaps& caps) {
  if (eps < 0.0) throw ConfigError("de_dimension needs eps >= 0");
  if (static_cast<int>(family.size()) > caps.max_family) {
    throw TooLargeError("distribution family exceeds the search cap");
  }
  if (cls.size() > caps.max_members) {
    throw TooLargeError("function class exceeds the search cap");
  }
  if (cls.size() == 0) throw ConfigError("function class must be nonempty");
  int ground = static_cast<int>(cls.members.front().size());
  for (const auto& m : cls.members) {
    if (static_cast<int>(m.size()) != ground) throw ConfigError("member ground set mismatch");
  }
  for (const auto& nu : family) validate_distribution(nu, ground);

  std::vector<std::vector<double>> expect(family.size(), std::vector<double>(cls.size()));
  for (std::size_t j = 0; j < family.size(); ++j) {
    for (int f = 0; f < cls.size(); ++f) expect[j][f] = expectation(family[j], cls.members[f]);
  }

  SearchState st;
  st.expect = &expect;
  st.family_size = static_cast<int>(family.size());
  st.member_count = cls.size();
  st.dfs({{eps, kInf}}, std::vector<double>(cls.size(), 0.0));

  EluderCertificate cert;
  cert.dimension = st.best_len;
  cert.sequence = st.best_sequence;
  cert.eps = eps;
  cert.eps_prime = st.best_len > 0 ? st.best_eps_prime : eps;
  cert.dimension_without_repetition = cert.dimension;
  // Witnesses at the certified eps': smallest member index per position.
  std::vector<FiniteDistribution> preds;
  for (int k = 0; k < cert.dimension; ++k) {
    auto res = is_independent(cls, preds, family[cert.sequence[k]], cert.eps_prime);
    if (!res.independent) throw ConfigError("internal: certificate failed to re-verify");
    cert.witnesses.push_back(*res.witness);
    preds.push_back(family[cert.sequence[k]]);
  }
  return cert;
}

BeDimensionResult be_dimension(const HypothesisClass& cls, const EpisodicMdp& mdp,
                               DistributionFamily family_kind, double eps,
                               const EluderCaps& caps) {
  if (cls.shape() != mdp.shape()) throw ConfigError("class shape does not match mdp");
  const MdpShape& sh = mdp.shape();
  BeDimensionResult result;
  for (int h = 0; h < sh.horizon; ++h) {
    // Residuals f_h - T_h f_{h+1}, one vector per member, duplicates collapsed.
    std::set<std::vector<double>> residuals;
    for (const auto& f : cls.members) {
      std::vector<double> f_next(sh.sa_size(), 0.0);
      if (h + 1 < sh.horizon) {
        std::copy_n(f.tables.begin() + sh.hsa(h + 1, 0, 0), sh.sa_size(), f_next.begin());
      }
      std::vector<double> image = bellman_apply(mdp, f_next, h);
      std::vector<double> resid(sh.sa_size());
      for (int j = 0; j < sh.sa_size(); ++j) {
        resid[j] = f.tables[sh.hsa(h, 0, 0) + j] - image[j];
      }
      residuals.insert(std::move(resid));
    }
    ScalarFunctionClass scls;
    scls.members.assign(residuals.begin(), residuals.end());

    std::set<std::vector<double>> dists;
    if (family_kind == DistributionFamily::kDelta) {
      for (int j = 0; j < sh.sa_size(); ++j) {
        std::vector<double> p(sh.sa_size(), 0.0);
        p[j] = 1.0;
        dists.insert(std::move(p));
      }
    } else {
      for (const auto& f : cls.members) {
        std::vector<double> occ = occupancy_measures(mdp, greedy_policy(f));
        dists.insert(std::vector<double>(occ.begin() + sh.hsa(h, 0, 0),
                                         occ.begin() + sh.hsa(h, 0, 0) + sh.sa_size()));
      }
    }
    std::vector<FiniteDistribution> family;
    for (const auto& p : dists) family.push_back(FiniteDistribution{p});

    result.per_step.push_back(de_dimension(scls, family, eps, caps));
    result.dimension = std::max(result.dimension, result.per_step.back().dimension);
  }
  return result;
}

}  // namespace prefts

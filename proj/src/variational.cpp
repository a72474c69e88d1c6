#include "variational.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "errors.hpp"
#include "hypothesis.hpp"

namespace prefts {

GaussianQPosterior GaussianQPosterior::isotropic(const MdpShape& shape, double mean_value,
                                                 double std_value, bool stationary) {
  if (!(std_value > 0.0)) throw ConfigError("gaussian posterior needs std > 0");
  GaussianQPosterior q;
  q.shape = shape;
  q.stationary = stationary;
  q.mean.assign(q.param_count(), mean_value);
  q.log_std.assign(q.param_count(), std::log(std_value));
  return q;
}

QSample draw_sample(const GaussianQPosterior& q, Rng& rng) {
  QSample s;
  s.noise.resize(q.param_count());
  for (double& z : s.noise) z = rng.gaussian();
  return s;
}

QHypothesis materialize(const GaussianQPosterior& q, const QSample& sample) {
  QHypothesis f;
  f.shape = q.shape;
  f.tables.resize(q.shape.hsa_size());
  for (int h = 0; h < q.shape.horizon; ++h) {
    for (int s = 0; s < q.shape.num_states; ++s) {
      for (int a = 0; a < q.shape.num_actions; ++a) {
        int p = q.param_index(h, s, a);
        f.tables[q.shape.hsa(h, s, a)] = q.mean[p] + std::exp(q.log_std[p]) * sample.noise[p];
      }
    }
  }
  return f;
}

static void check_compatible(const GaussianQPosterior& q, const GaussianQPosterior& p) {
  if (q.shape != p.shape || q.stationary != p.stationary) {
    throw ConfigError("posterior and prior parameterizations do not match");
  }
}

double kl_divergence(const GaussianQPosterior& q, const GaussianQPosterior& prior) {
  check_compatible(q, prior);
  double kl = 0.0;
  for (int i = 0; i < q.param_count(); ++i) {
    double var_q = std::exp(2.0 * q.log_std[i]);
    double var_p = std::exp(2.0 * prior.log_std[i]);
    double dmu = q.mean[i] - prior.mean[i];
    kl += (prior.log_std[i] - q.log_std[i]) + (var_q + dmu * dmu) / (2.0 * var_p) - 0.5;
  }
  return kl;
}

double elbo_estimate(const GaussianQPosterior& q, const PreferenceDataset& dataset,
                     const GaussianQPosterior& prior, const LinkFunction& link,
                     const std::vector<double>& transitions, const std::vector<QSample>& samples) {
  if (samples.empty()) throw ConfigError("elbo_estimate needs at least one sample");
  double ll = 0.0;
  for (const auto& s : samples) {
    ll += log_likelihood(dataset, materialize(q, s), link, transitions);
  }
  return ll / static_cast<double>(samples.size()) - kl_divergence(q, prior);
}

namespace {

// d log(term) / d(r0 - r1) for one record, with the same likelihood floor
// as record_log_term (flat region contributes zero gradient).
double dlog_dgap(double r0, double r1, int o, const LinkFunction& link) {
  double gap = r0 - r1;
  double term = o == 1 ? link_eval(link, -gap) : link_eval(link, gap);
  if (term <= kLikelihoodFloor) return 0.0;
  double dterm = o == 1 ? -link_derivative(link, -gap) : link_derivative(link, gap);
  return dterm / term;
}

}  // namespace

ElboGradient elbo_gradient(const GaussianQPosterior& q, const PreferenceDataset& dataset,
                           const GaussianQPosterior& prior, const LinkFunction& link,
                           const std::vector<double>& transitions,
                           const std::vector<QSample>& samples, double likelihood_scale) {
  if (samples.empty()) throw ConfigError("elbo_gradient needs at least one sample");
  check_compatible(q, prior);
  const MdpShape& sh = q.shape;

  ElboGradient grad;
  grad.mean.assign(q.param_count(), 0.0);
  grad.log_std.assign(q.param_count(), 0.0);

  double sample_weight = likelihood_scale / static_cast<double>(samples.size());
  for (const auto& sample : samples) {
    if (dataset.empty()) break;  // likelihood term is identically zero
    QHypothesis f = materialize(q, sample);
    std::vector<double> table = implied_reward_table(f, transitions);

    // Accumulate d(mean likelihood)/dQ in hsa space for this sample.
    std::vector<double> gq(sh.hsa_size(), 0.0);
    auto add_trajectory = [&](const Trajectory& tau, double w) {
      if (w == 0.0) return;
      for (int h = 0; h < sh.horizon; ++h) {
        int s = tau.states[h], a = tau.actions[h];
        gq[sh.hsa(h, s, a)] += w;
        if (h + 1 < sh.horizon) {
          for (int s2 = 0; s2 < sh.num_states; ++s2) {
            double p = transitions[sh.hsas(h, s, a, s2)];
            if (p == 0.0) continue;
            int arg = 0;
            double best = f.at(h + 1, s2, 0);
            for (int a2 = 1; a2 < sh.num_actions; ++a2) {
              if (f.at(h + 1, s2, a2) > best) {
                best = f.at(h + 1, s2, a2);
                arg = a2;
              }
            }
            gq[sh.hsa(h + 1, s2, arg)] -= w * p;
          }
        }
      }
    };

    auto score = [&](const Trajectory& tau) {
      double r = 0.0;
      for (int h = 0; h < sh.horizon; ++h) r += table[sh.hsa(h, tau.states[h], tau.actions[h])];
      return r;
    };
    for (const auto& rec : dataset) {
      double r0 = score(rec.tau0);
      double r1 = score(rec.tau1);
      double w = dlog_dgap(r0, r1, rec.o, link);
      add_trajectory(rec.tau0, w);
      add_trajectory(rec.tau1, -w);
    }

    for (int h = 0; h < sh.horizon; ++h) {
      for (int s = 0; s < sh.num_states; ++s) {
        for (int a = 0; a < sh.num_actions; ++a) {
          int p = q.param_index(h, s, a);
          double g = gq[sh.hsa(h, s, a)];
          grad.mean[p] += sample_weight * g;
          grad.log_std[p] += sample_weight * g * sample.noise[p] * std::exp(q.log_std[p]);
        }
      }
    }
  }

  // Analytic KL gradient.
  for (int i = 0; i < q.param_count(); ++i) {
    double var_p = std::exp(2.0 * prior.log_std[i]);
    grad.mean[i] -= (q.mean[i] - prior.mean[i]) / var_p;
    grad.log_std[i] -= std::exp(2.0 * q.log_std[i]) / var_p - 1.0;
  }
  return grad;
}

FitResult fit_variational(const PreferenceDataset& dataset, const GaussianQPosterior& init,
                          const GaussianQPosterior& prior, const LinkFunction& link,
                          const std::vector<double>& transitions, const ElboConfig& cfg, Rng& rng,
                          const std::function<double(const GaussianQPosterior&)>& evaluate) {
  if (cfg.batch_size < 1 || cfg.samples_per_iter < 1 || cfg.reuse_window < 1 ||
      cfg.smoothing < 1 || cfg.iterations < 0 || !(cfg.step_size > 0.0)) {
    throw ConfigError("invalid elbo config");
  }
  check_compatible(init, prior);

  FitResult result;
  result.q = init;
  std::deque<QSample> fifo;
  int dataset_size = static_cast<int>(dataset.size());
  int batch = std::min(cfg.batch_size, std::max(dataset_size, 0));

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    for (int j = 0; j < cfg.samples_per_iter; ++j) {
      fifo.push_back(draw_sample(result.q, rng));
      if (static_cast<int>(fifo.size()) > cfg.reuse_window) fifo.pop_front();
    }
    std::vector<QSample> samples(fifo.begin(), fifo.end());

    PreferenceDataset minibatch;
    double scale = 1.0;
    if (dataset_size > 0) {
      for (int j = 0; j < batch; ++j) {
        minibatch.push_back(dataset[(static_cast<long long>(iter) * batch + j) % dataset_size]);
      }
      scale = static_cast<double>(dataset_size) / batch;
    }

    ElboGradient grad = elbo_gradient(result.q, minibatch, prior, link, transitions, samples, scale);
    for (int i = 0; i < result.q.param_count(); ++i) {
      result.q.mean[i] += cfg.step_size * grad.mean[i];
      result.q.log_std[i] += cfg.step_size * grad.log_std[i];
    }
    for (double m : result.q.mean) {
      if (std::abs(m) > 1e3 * result.q.shape.horizon) {
        throw DivergenceError("variational mean diverged");
      }
    }

    result.trace.elbo.push_back(
        elbo_estimate(result.q, dataset, prior, link, transitions, samples));
    if (evaluate) result.trace.value_of_mean_greedy.push_back(evaluate(result.q));
  }
  result.trace.smoothed = smooth(result.trace.elbo, cfg.smoothing);
  return result;
}

std::vector<double> smooth(const std::vector<double>& series, int window) {
  if (window < 1) throw ConfigError("smoothing window must be >= 1");
  std::vector<double> out(series.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    acc += series[i];
    if (i >= static_cast<std::size_t>(window)) acc -= series[i - window];
    out[i] = acc / std::min<std::size_t>(i + 1, window);
  }
  return out;
}

}  // namespace prefts

#pragma once

#include <functional>
#include <vector>

#include "link.hpp"
#include "mdp.hpp"
#include "posterior.hpp"
#include "rng.hpp"

namespace prefts {

// Independent Gaussian posterior over Q values, one (mean, log-std) pair per
// parameter. Stationary mode shares a single (s,a) table across steps;
// otherwise parameters are per (h,s,a).
struct GaussianQPosterior {
  MdpShape shape;
  bool stationary = false;
  std::vector<double> mean;
  std::vector<double> log_std;

  int param_count() const {
    return (stationary ? 1 : shape.horizon) * shape.num_states * shape.num_actions;
  }
  int param_index(int h, int s, int a) const {
    return shape.hsa(stationary ? 0 : h, s, a);
  }

  static GaussianQPosterior isotropic(const MdpShape& shape, double mean_value, double std_value,
                                      bool stationary = false);
};

// Reparameterized draw: only the noise is stored, so a sample stays valid
// when the parameters move (Q = mean + exp(log_std) * z).
struct QSample {
  std::vector<double> noise;  // param-sized
};

struct ElboConfig {
  int batch_size = 5;        // n
  int samples_per_iter = 20;  // m
  int reuse_window = 50;      // l, FIFO of latest samples
  double step_size = 0.05;
  int iterations = 0;
  int smoothing = 20;  // omega
};

struct ElboGradient {
  std::vector<double> mean;
  std::vector<double> log_std;
};

struct ElboTrace {
  std::vector<double> elbo;
  std::vector<double> smoothed;
  std::vector<double> value_of_mean_greedy;  // empty when no evaluator given
};

struct FitResult {
  GaussianQPosterior q;
  ElboTrace trace;
};

QSample draw_sample(const GaussianQPosterior& q, Rng& rng);

// Expand a sample into a full per-(h,s,a) Q table.
QHypothesis materialize(const GaussianQPosterior& q, const QSample& sample);

// KL(q || p) for diagonal Gaussians, closed form, fixed summation order.
double kl_divergence(const GaussianQPosterior& q, const GaussianQPosterior& prior);

// (1/|samples|) sum_s log p(dataset | Q_s) - KL(q || prior).
double elbo_estimate(const GaussianQPosterior& q, const PreferenceDataset& dataset,
                     const GaussianQPosterior& prior, const LinkFunction& link,
                     const std::vector<double>& transitions, const std::vector<QSample>& samples);

// Pathwise gradient of elbo_estimate at the same fixed noise; the KL part is
// analytic. likelihood_scale multiplies only the likelihood term (used for
// mini-batch upscaling; 1 reproduces elbo_estimate's derivative exactly).
ElboGradient elbo_gradient(const GaussianQPosterior& q, const PreferenceDataset& dataset,
                           const GaussianQPosterior& prior, const LinkFunction& link,
                           const std::vector<double>& transitions,
                           const std::vector<QSample>& samples, double likelihood_scale = 1.0);

// Fixed-step-size ELBO ascent with sample reuse: each iteration draws
// samples_per_iter fresh noise vectors, keeps the latest reuse_window of
// them, and steps along the gradient estimated on a deterministically cycled
// mini-batch. Aborts with DivergenceError when |mean| exceeds 1e3 * H.
// `evaluate` (optional) is called after every iteration to fill the
// value_of_mean_greedy trace column.
FitResult fit_variational(const PreferenceDataset& dataset, const GaussianQPosterior& init,
                          const GaussianQPosterior& prior, const LinkFunction& link,
                          const std::vector<double>& transitions, const ElboConfig& cfg, Rng& rng,
                          const std::function<double(const GaussianQPosterior&)>& evaluate = {});

// Trailing moving average with truncated windows at the start.
std::vector<double> smooth(const std::vector<double>& series, int window);

}  // namespace prefts

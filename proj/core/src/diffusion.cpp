#include "mfract/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "mfract/random.hpp"

namespace mfract::diffusion {
namespace {

constexpr double kAlphaBarFloor = 1e-300;

void require_same_shape(const RealGrid& a, const RealGrid& b, const char* what) {
  if (!a.same_shape(b)) throw Error(std::string(what) + " shape does not match the image");
}

}  // namespace

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : beta_(std::move(betas)) {
  if (beta_.empty()) throw Error("noise schedule needs at least one step");
  double log_sum = 0.0;
  for (double b : beta_) {
    if (!(b > 0.0 && b < 1.0)) throw Error("every beta must lie in (0, 1)");
    log_sum += std::log1p(-b);
    log_alpha_bar_.push_back(log_sum);
  }
  for (std::size_t t = 1; t <= beta_.size(); ++t) {
    sigma2_.push_back(one_minus_alpha_bar(t - 1) / one_minus_alpha_bar(t) * beta_[t - 1]);
  }
}

std::size_t NoiseSchedule::index(std::size_t t) const {
  if (t < 1 || t > beta_.size()) {
    throw Error("timestep " + std::to_string(t) + " outside [1, " + std::to_string(beta_.size()) + "]");
  }
  return t - 1;
}

double NoiseSchedule::alpha_bar(std::size_t t) const {
  if (t == 0) return 1.0;
  return std::exp(log_alpha_bar_.at(index(t)));
}

double NoiseSchedule::one_minus_alpha_bar(std::size_t t) const {
  if (t == 0) return 0.0;
  return -std::expm1(log_alpha_bar_.at(index(t)));
}

NoiseSchedule linear_schedule(std::size_t steps, double beta_start, double beta_end) {
  if (steps < 2) throw Error("linear schedule needs at least 2 steps");
  if (!(beta_start > 0.0 && beta_start < beta_end && beta_end < 1.0)) {
    throw Error("linear schedule needs 0 < beta_start < beta_end < 1");
  }
  std::vector<double> betas(steps);
  for (std::size_t t = 1; t <= steps; ++t) {
    const double w = static_cast<double>(t - 1) / static_cast<double>(steps - 1);
    betas[t - 1] = std::lerp(beta_start, beta_end, w);
  }
  return NoiseSchedule(std::move(betas));
}

RealGrid q_sample(const RealGrid& x0, std::size_t t, const RealGrid& noise,
                  const NoiseSchedule& sched) {
  require_same_shape(x0, noise, "noise");
  if (t > sched.steps()) throw Error("timestep beyond the schedule");
  const double signal = std::sqrt(sched.alpha_bar(t));
  const double spread = std::sqrt(sched.one_minus_alpha_bar(t));
  RealGrid out(x0.height(), x0.width());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    out.values()[i] = signal * x0.values()[i] + spread * noise.values()[i];
  }
  return out;
}

RealGrid invert_x0(const RealGrid& xt, std::size_t t, const RealGrid& noise,
                   const NoiseSchedule& sched) {
  require_same_shape(xt, noise, "noise");
  if (t > sched.steps()) throw Error("timestep beyond the schedule");
  const double ab = sched.alpha_bar(t);
  if (ab < kAlphaBarFloor) throw Error("alpha_bar underflows; x0 cannot be recovered");
  const double signal = std::sqrt(ab);
  const double spread = std::sqrt(sched.one_minus_alpha_bar(t));
  RealGrid out(xt.height(), xt.width());
  for (std::size_t i = 0; i < xt.size(); ++i) {
    out.values()[i] = (xt.values()[i] - spread * noise.values()[i]) / signal;
  }
  return out;
}

RealGrid posterior_step(const RealGrid& xt, std::size_t t, const RealGrid& epsilon_hat,
                        const NoiseSchedule& sched, const RealGrid& step_noise) {
  if (t == 0) throw Error("posterior step needs t >= 1");
  require_same_shape(xt, epsilon_hat, "epsilon_hat");
  require_same_shape(xt, step_noise, "step noise");
  const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha(t));
  const double eps_coeff = sched.beta(t) / std::sqrt(sched.one_minus_alpha_bar(t));
  const double sigma = std::sqrt(sched.sigma2(t));
  RealGrid out(xt.height(), xt.width());
  for (std::size_t i = 0; i < xt.size(); ++i) {
    const double mean = inv_sqrt_alpha * (xt.values()[i] - eps_coeff * epsilon_hat.values()[i]);
    out.values()[i] = mean + sigma * step_noise.values()[i];
  }
  return out;
}

TrainingPair loss_target(const RealGrid& x0, std::size_t t, const RealGrid& noise,
                         const NoiseSchedule& sched) {
  return {q_sample(x0, t, noise, sched), noise};
}

ChainReport chain_equals_marginal(const RealGrid& x0, std::size_t t, const NoiseSchedule& sched,
                                  std::uint64_t seed, std::size_t trials) {
  if (t < 1 || t > std::min(kMaxChainSteps, sched.steps())) {
    throw Error("chain check supports 1 <= t <= " + std::to_string(kMaxChainSteps));
  }
  if (trials < 2) throw Error("chain check needs at least 2 trials");
  const std::size_t n = x0.size();
  std::vector<double> signal(t), spread(t);
  for (std::size_t s = 1; s <= t; ++s) {
    signal[s - 1] = std::sqrt(sched.alpha(s));
    spread[s - 1] = std::sqrt(sched.beta(s));
  }

  Rng rng(seed);
  std::vector<double> mean(n, 0.0), m2(n, 0.0), x(n);
  ChainReport report;
  report.t = t;
  report.trials = trials;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::copy(x0.values().begin(), x0.values().end(), x.begin());
    for (std::size_t s = 0; s < t; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        const double z = rng.normal();
        const double before = x[i];
        x[i] = signal[s] * before + spread[s] * z;
        if (trial == 0 && t == 1) {
          const double marginal = std::sqrt(sched.alpha_bar(1)) * x0.values()[i] +
                                  std::sqrt(sched.one_minus_alpha_bar(1)) * z;
          report.same_noise_gap = std::max(report.same_noise_gap, std::abs(marginal - x[i]));
        }
      }
    }
    // Welford update of the per-pixel moments.
    const double count = static_cast<double>(trial + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double delta = x[i] - mean[i];
      mean[i] += delta / count;
      m2[i] += delta * (x[i] - mean[i]);
    }
  }

  const double trials_d = static_cast<double>(trials);
  const double expected_var = sched.one_minus_alpha_bar(t);
  const double expected_scale = std::sqrt(sched.alpha_bar(t));
  const double mean_se = std::sqrt(expected_var / trials_d);
  const double var_se = expected_var * std::sqrt(2.0 / (trials_d - 1.0));
  report.min_variance_ratio = std::numeric_limits<double>::infinity();
  report.max_variance_ratio = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sample_var = m2[i] / (trials_d - 1.0);
    const double z_mean = (mean[i] - expected_scale * x0.values()[i]) / mean_se;
    const double z_var = (sample_var - expected_var) / var_se;
    report.max_abs_z_mean = std::max(report.max_abs_z_mean, std::abs(z_mean));
    report.max_abs_z_variance = std::max(report.max_abs_z_variance, std::abs(z_var));
    const double ratio = sample_var / expected_var;
    report.min_variance_ratio = std::min(report.min_variance_ratio, ratio);
    report.max_variance_ratio = std::max(report.max_variance_ratio, ratio);
  }
  return report;
}

void write_schedule_csv(const std::filesystem::path& path, const NoiseSchedule& sched) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "t,beta,alpha,alpha_bar,sigma2\n" << std::setprecision(17);
  for (std::size_t t = 1; t <= sched.steps(); ++t) {
    out << t << ',' << sched.beta(t) << ',' << sched.alpha(t) << ',' << sched.alpha_bar(t) << ','
        << sched.sigma2(t) << '\n';
  }
}

}  // namespace mfract::diffusion

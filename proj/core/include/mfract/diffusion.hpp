#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mfract/grid.hpp"

namespace mfract::diffusion {

inline constexpr std::size_t kDefaultSteps = 1000;
inline constexpr double kDefaultBetaStart = 1e-6;
inline constexpr double kDefaultBetaEnd = 1e-2;

// Timesteps are 1-based. Step 0 is the clean image, with alpha_bar(0) = 1.
class NoiseSchedule {
 public:
  // Builds alpha_bar from the log-domain running sum of log(1 - beta).
  explicit NoiseSchedule(std::vector<double> betas);

  std::size_t steps() const noexcept { return beta_.size(); }

  double beta(std::size_t t) const { return beta_.at(index(t)); }
  double alpha(std::size_t t) const { return 1.0 - beta(t); }
  // t may be 0.
  double alpha_bar(std::size_t t) const;
  // 1 - alpha_bar(t), computed without cancellation.
  double one_minus_alpha_bar(std::size_t t) const;
  // (1 - alpha_bar(t-1)) / (1 - alpha_bar(t)) * beta(t); zero at t = 1.
  double sigma2(std::size_t t) const { return sigma2_.at(index(t)); }

 private:
  std::size_t index(std::size_t t) const;

  std::vector<double> beta_;
  std::vector<double> log_alpha_bar_;
  std::vector<double> sigma2_;
};

// beta_t = lerp(beta_start, beta_end, (t - 1) / (T - 1)); both endpoints are
// attained exactly.
NoiseSchedule linear_schedule(std::size_t steps = kDefaultSteps,
                              double beta_start = kDefaultBetaStart,
                              double beta_end = kDefaultBetaEnd);

// sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) noise, t in [0, T].
RealGrid q_sample(const RealGrid& x0, std::size_t t, const RealGrid& noise,
                  const NoiseSchedule& sched);

// Exact inverse of q_sample for the same noise.
RealGrid invert_x0(const RealGrid& xt, std::size_t t, const RealGrid& noise,
                   const NoiseSchedule& sched);

// mu_t + sigma_t z with mu_t = (x_t - eps_hat (1 - alpha_t) / sqrt(1 - alpha_bar_t)) / sqrt(alpha_t).
RealGrid posterior_step(const RealGrid& xt, std::size_t t, const RealGrid& epsilon_hat,
                        const NoiseSchedule& sched, const RealGrid& step_noise);

struct TrainingPair {
  RealGrid network_input;
  RealGrid target;
};
TrainingPair loss_target(const RealGrid& x0, std::size_t t, const RealGrid& noise,
                         const NoiseSchedule& sched);

struct ChainReport {
  std::size_t t = 0;
  std::size_t trials = 0;
  double max_abs_z_mean = 0.0;      // per-pixel sample mean vs sqrt(alpha_bar) x0
  double max_abs_z_variance = 0.0;  // per-pixel sample variance vs 1 - alpha_bar
  double min_variance_ratio = 0.0;  // chain variance / marginal variance
  double max_variance_ratio = 0.0;
  // Largest |chain - marginal| when one shared noise draw drives both; only
  // meaningful at t = 1, where the two formulas coincide.
  double same_noise_gap = 0.0;

  double max_abs_z() const { return max_abs_z_mean > max_abs_z_variance ? max_abs_z_mean : max_abs_z_variance; }
};

inline constexpr std::size_t kMaxChainSteps = 200;

// Runs the single-step forward kernel t times per trial with seeded noise and
// compares the per-pixel moments with the closed-form marginal at t.
ChainReport chain_equals_marginal(const RealGrid& x0, std::size_t t, const NoiseSchedule& sched,
                                  std::uint64_t seed, std::size_t trials = 10000);

// Columns: t, beta, alpha, alpha_bar, sigma2.
void write_schedule_csv(const std::filesystem::path& path, const NoiseSchedule& sched);

}  // namespace mfract::diffusion

// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes. Arguments are the other test executables, which
// are timed for the suite wall-clock budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "mfract/mfract.hpp"

using namespace mfract;

namespace {

constexpr double kDensityOracleTol = 1e-9;
constexpr double kDensityOracleSeconds = 10.0;
constexpr double kPlantedTol = 1e-9;
constexpr double kCarpetDimension = 1.8928;
constexpr double kCarpetTol = 0.05;
constexpr double kCarpetMinR2 = 0.999;
constexpr double kCarpetSeconds = 5.0;
constexpr double kConstantDbcTol = 0.05;
constexpr double kNoiseDbcLo = 2.6, kNoiseDbcHi = 3.0;
constexpr double kGapLo = 0.01, kGapHi = 0.2;
constexpr double kMonofractalMaxWidth = 0.3;
constexpr double kMonofractalPeakTol = 0.2;
constexpr double kCascadeMaxF = 2.2;
constexpr double kMembershipSumTol = 1e-6;
constexpr double kSharpLimitGap = 1e-3;
constexpr double kSharpness = 1e6;
constexpr double kMidpointMargin = 1e-2;
constexpr double kFilterTol = 1e-9;
constexpr double kBetaStart = 1e-6, kBetaEnd = 1e-2;
constexpr double kRoundtripTol = 1e-9;
constexpr double kChainMaxZ = 4.0;
constexpr std::size_t kChainTrials = 10000;
constexpr double kSuiteSeconds = 180.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

double max_abs_diff(const RealGrid& a, const RealGrid& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  return worst;
}

RealGrid normal_grid(std::size_t h, std::size_t w, Rng& rng) {
  RealGrid g(h, w);
  for (double& v : g.values()) v = rng.normal();
  return g;
}

Verdict density_oracle() {
  const auto t0 = Clock::now();
  const density::DensityFitConfig cfg;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const density::MeasureStack s = density::measure_stack(fixtures::uniform_noise(64, 64, 5000 + seed), cfg);
    worst = std::max(worst, density::max_abs_difference(density::density_exact(s, cfg).d,
                                                        density::density_closed_form(s, cfg).d));
  }
  const double secs = seconds_since(t0);
  return {worst <= kDensityOracleTol && secs < kDensityOracleSeconds,
          "max_abs_diff=" + fmt(worst) + " seconds=" + fmt(secs)};
}

Verdict planted_power_law() {
  const density::DensityFitConfig cfg;
  double worst = 0.0;
  for (double gamma : {0.5, 1.0, 1.5, 2.0, 2.7}) {
    // Realistic window sums: c l^gamma with c in [10, 60].
    Rng rng(static_cast<std::uint64_t>(gamma * 10));
    RealGrid c(32, 32);
    for (double& v : c.values()) v = 10.0 + 50.0 * rng.uniform();
    density::MeasureStack s;
    s.window_sizes = cfg.window_sizes;
    for (std::size_t l : s.window_sizes) {
      RealGrid m = c;
      for (double& v : m.values()) v *= std::pow(static_cast<double>(l), gamma);
      s.maps.push_back(std::move(m));
    }
    for (const density::DensityMap& m : {density::density_exact(s, cfg), density::density_closed_form(s, cfg)}) {
      for (double d : m.d.values()) worst = std::max(worst, std::abs(d - gamma));
    }
  }
  return {worst <= kPlantedTol, "max_error=" + fmt(worst)};
}

Verdict carpet() {
  const auto t0 = Clock::now();
  const boxcount::FractalDimensionEstimate e =
      boxcount::fit_dimension(boxcount::box_count_binary(fixtures::sierpinski_carpet(5), {3, 9, 27, 81}));
  const double secs = seconds_since(t0);
  return {std::abs(e.dimension - kCarpetDimension) <= kCarpetTol && e.r_squared >= kCarpetMinR2 &&
              secs < kCarpetSeconds,
          "D=" + fmt(e.dimension) + " r2=" + fmt(e.r_squared) + " seconds=" + fmt(secs)};
}

Verdict gray_baselines() {
  const auto sizes = boxcount::default_sizes(256, 256);
  const double flat =
      boxcount::fit_dimension(boxcount::box_count_gray(fixtures::constant(256, 256, 0.5), sizes)).dimension;
  const double noise =
      boxcount::fit_dimension(boxcount::box_count_gray(fixtures::uniform_noise(256, 256, 42), sizes)).dimension;
  return {std::abs(flat - 2.0) <= kConstantDbcTol && noise > kNoiseDbcLo && noise < kNoiseDbcHi,
          "constant=" + fmt(flat) + " noise=" + fmt(noise)};
}

Verdict fd_gap() {
  double total = 0.0;
  int hr_higher = 0;
  const int n = 20;
  for (int i = 0; i < n; ++i) {
    const GrayImage hr = fixtures::fbm_texture(256, 0.3 + 0.025 * i, 100 + i);
    const boxcount::FdGap g = boxcount::fd_gap(hr, resize_bicubic(hr, Scale{1, 4}));
    total += g.diff;
    hr_higher += g.hr.dimension > g.lr.dimension;
  }
  const double mean = total / n;
  return {mean > kGapLo && mean < kGapHi,
          "mean_abs_diff=" + fmt(mean) + " hr_above_lr=" + std::to_string(hr_higher) + "/" + std::to_string(n)};
}

Verdict spectrum_collapse() {
  const mfspec::SpectrumCurve flat = mfspec::spectrum_from_image(fixtures::constant(256, 256, 0.5));
  const mfspec::SpectrumCurve cascade = mfspec::spectrum_from_image(fixtures::binomial_cascade(8, 0.7));
  const double max_f = *std::max_element(cascade.f_values.begin(), cascade.f_values.end());
  const bool concave = cascade.quad_coeffs[0] < 0.0;
  return {flat.width < kMonofractalMaxWidth && std::abs(flat.peak_alpha - 2.0) < kMonofractalPeakTol && concave &&
              max_f <= kCascadeMaxF,
          "width=" + fmt(flat.width) + " peak=" + fmt(flat.peak_alpha) + " cascade_a2=" +
              fmt(cascade.quad_coeffs[0]) + " cascade_max_f=" + fmt(max_f)};
}

Verdict soft_assignment() {
  Rng rng(77);
  RealGrid d(1000, 1000);
  for (double& v : d.values()) v = 1.0 + 2.0 * rng.uniform();
  grouping::AnchorSet anchors = grouping::init_anchors(d, 64);
  const grouping::MembershipStack m = grouping::soft_assign(d, anchors);
  double sum_err = 0.0;
  for (std::size_t p = 0; p < d.size(); ++p) {
    double s = 0.0;
    for (const auto& plane : m) s += plane.values()[p];
    sum_err = std::max(sum_err, std::abs(s - 1.0));
  }

  const std::vector<double> centers = {0.1, 0.3, 0.45, 0.7, 0.9};
  std::vector<double> edges = {0.0};
  for (std::size_t k = 0; k + 1 < centers.size(); ++k) edges.push_back(0.5 * (centers[k] + centers[k + 1]));
  edges.push_back(1.0);
  RealGrid x(1, 1000);
  for (double& v : x.values()) {
    bool near = true;
    while (near) {
      v = rng.uniform();
      near = false;
      for (std::size_t k = 1; k + 1 < edges.size(); ++k) near = near || std::abs(v - edges[k]) < kMidpointMargin;
    }
  }
  grouping::AnchorSet sharp;
  sharp.centers = centers;
  sharp.sharpness.assign(centers.size(), kSharpness);
  const grouping::MembershipStack soft = grouping::soft_assign(x, sharp);
  const grouping::MembershipStack hard = grouping::hard_assign(x, edges);
  double gap = 0.0;
  for (std::size_t k = 0; k < centers.size(); ++k) gap = std::max(gap, max_abs_diff(soft[k], hard[k]));
  return {sum_err <= kMembershipSumTol && gap < kSharpLimitGap, "sum_err=" + fmt(sum_err) + " sharp_gap=" + fmt(gap)};
}

Verdict filter_algebra() {
  double identity = 0.0, parseval = 0.0;
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{97, 61}, {45, 77}, {128, 30}}) {
    const RealGrid x = fixtures::uniform_noise(h, w, h * 1000 + w).pixels();
    identity = std::max(identity, max_abs_diff(spectral::apply_filter(x, spectral::AttentionMap::identity(h, w)).image, x));
    const double freq = spectral::band_energy(spectral::fft2(x), {}) / static_cast<double>(h * w);
    parseval = std::max(parseval, std::abs(freq - spectral::spatial_energy(x)));
  }

  const RealGrid noise = fixtures::gaussian_grid(96, 80, 3);
  RealGrid x = fixtures::fbm_texture(96, 0.6, 4).pixels();
  RealGrid sized(96, 80);
  for (std::size_t r = 0; r < 96; ++r) {
    for (std::size_t c = 0; c < 80; ++c) sized(r, c) = x(r, c) + 0.2 * noise(r, c);
  }
  const spectral::FrequencyBand high{0.3, spectral::kMaxRadialFrequency};
  // Radii at or below the band edge leave only rounding residue in it.
  const double roundoff = 1e-20 * spectral::band_energy(sized, high);
  bool monotone = true;
  double previous = -1.0;
  for (double r : {0.1, 0.2, 0.3, 0.35, 0.4, 0.5, 0.6, 0.7}) {
    const double e = spectral::band_energy(
        spectral::apply_filter(sized, spectral::AttentionMap::lowpass(96, 80, r)).image, high);
    monotone = monotone && e >= previous - roundoff;
    previous = e;
  }
  return {identity <= kFilterTol && parseval <= kFilterTol && monotone,
          "identity=" + fmt(identity) + " parseval=" + fmt(parseval) + " monotone=" + (monotone ? "yes" : "no")};
}

Verdict schedule_algebra() {
  const diffusion::NoiseSchedule s = diffusion::linear_schedule(1000, kBetaStart, kBetaEnd);
  const bool endpoints = s.beta(1) == kBetaStart && s.beta(1000) == kBetaEnd;
  Rng rng(9);
  const RealGrid x0 = fixtures::gaussian_grid(8, 8, 10);
  double roundtrip = 0.0;
  for (std::size_t t : {1, 10, 100, 500, 1000}) {
    const RealGrid noise = normal_grid(8, 8, rng);
    roundtrip = std::max(roundtrip, max_abs_diff(diffusion::invert_x0(diffusion::q_sample(x0, t, noise, s), t, noise, s), x0));
  }
  double z = 0.0;
  for (std::size_t t : {1, 50, 100}) {
    z = std::max(z, diffusion::chain_equals_marginal(x0, t, s, 1000 + t, kChainTrials).max_abs_z());
  }
  const RealGrid noise = normal_grid(8, 8, rng);
  const RealGrid back = diffusion::posterior_step(diffusion::q_sample(x0, 1, noise, s), 1, noise, s, RealGrid(8, 8));
  const double posterior = max_abs_diff(back, x0);
  return {endpoints && roundtrip <= kRoundtripTol && z < kChainMaxZ && posterior <= kRoundtripTol,
          std::string("endpoints=") + (endpoints ? "exact" : "off") + " roundtrip=" + fmt(roundtrip) +
              " chain_max_z=" + fmt(z) + " posterior=" + fmt(posterior)};
}

Verdict mfb_pipeline() {
  const GrayImage tex = fixtures::fbm_texture(128, 0.5, 11);
  set_thread_count(1);
  const grouping::MfbResult one = grouping::mfb_forward(tex);
  const grouping::MfbResult again = grouping::mfb_forward(tex);
  set_thread_count(4);
  const grouping::MfbResult four = grouping::mfb_forward(tex);
  set_thread_count(0);
  const bool shape = one.anchors.size() == 64 && one.output.channels() == 3 && one.output.height() == 128 &&
                     one.output.width() == 128;
  const bool identical = one.output == again.output && one.output == four.output;

  // Step at column 64: mean deviation from a flat reference pixel, edge band
  // |c - 64| <= 4 against flat columns |c - 64| >= 16, rows and columns 16..111.
  const grouping::MfbResult step = grouping::mfb_forward(fixtures::step_edge(128, 128, 64));
  double edge = 0.0, flat = 0.0;
  std::size_t n_edge = 0, n_flat = 0;
  for (const auto& plane : step.output) {
    const double ref = plane(64, 20);
    for (std::size_t r = 16; r < 112; ++r) {
      for (std::size_t c = 16; c < 112; ++c) {
        const std::size_t dist = c > 64 ? c - 64 : 64 - c;
        if (dist <= 4) {
          edge += std::abs(plane(r, c) - ref);
          ++n_edge;
        } else if (dist >= 16) {
          flat += std::abs(plane(r, c) - ref);
          ++n_flat;
        }
      }
    }
  }
  edge /= static_cast<double>(n_edge);
  flat /= static_cast<double>(n_flat);
  return {shape && identical && edge > flat,
          std::string("shape=") + (shape ? "128x128x3" : "wrong") + " bit_identical=" + (identical ? "yes" : "no") +
              " edge=" + fmt(edge) + " flat=" + fmt(flat)};
}

}  // namespace

int main(int argc, char** argv) {
  const auto start = Clock::now();
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"density oracle equivalence", density_oracle},
      {"planted power-law recovery", planted_power_law},
      {"sierpinski carpet dimension", carpet},
      {"grayscale dbc baselines", gray_baselines},
      {"fd gap after 4x bicubic", fd_gap},
      {"monofractal collapse and cascade", spectrum_collapse},
      {"soft assignment contracts", soft_assignment},
      {"fft filter algebra", filter_algebra},
      {"noise schedule algebra", schedule_algebra},
      {"mfb shape and determinism", mfb_pipeline},
  };
  bool all = true;
  int index = 1;
  for (const auto& [name, check] : criteria) {
    Verdict v{false, ""};
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    all = all && v.pass;
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", index++, name.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }

  bool suites_ok = true;
  for (int i = 1; i < argc; ++i) {
    const std::string cmd = std::string("\"") + argv[i] + "\" --gtest_brief=1 > /dev/null 2>&1";
    suites_ok = suites_ok && std::system(cmd.c_str()) == 0;
  }
  const double secs = seconds_since(start);
  const bool budget = secs < kSuiteSeconds && suites_ok;
  all = all && budget;
  std::printf("%s %d full suite under 3 minutes: suites=%d all_passed=%s seconds=%s\n", budget ? "PASS" : "FAIL",
              index, argc - 1, suites_ok ? "yes" : "no", fmt(secs).c_str());
  return all ? 0 : 1;
}

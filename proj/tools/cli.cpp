#include "cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "mfract/mfract.hpp"

namespace mfract::cli {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string num(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

struct CommonFlags {
  fs::path out = ".";
  std::uint64_t seed = 0;
  fs::path manifest;
  bool quiet = false;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--out", flags.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", flags.seed, "Seed for every random draw")->capture_default_str();
  sub->add_option("--manifest", flags.manifest, "Manifest path (default OUT/manifest.json)");
  sub->add_flag("--quiet", flags.quiet, "Only print errors");
}

// Per-run bookkeeping that ends up in the manifest.
class Run {
 public:
  Run(std::string command, const CommonFlags& flags, std::vector<std::string> argv,
      std::ostream& out, std::ostream& err)
      : command_(std::move(command)), flags_(flags), argv_(std::move(argv)), out_(out), err_(err) {}

  ordered_json& config() { return config_; }
  const CommonFlags& flags() const { return flags_; }
  std::ostream& err() { return err_; }

  void info(const std::string& line) {
    if (!flags_.quiet) out_ << line << '\n';
  }
  void result(const std::string& line) { out_ << line << '\n'; }
  void warn(const std::string& line) { err_ << "warning: " << line << '\n'; }

  void input(const fs::path& p) { inputs_.push_back(p); }

  fs::path output(const std::string& name) {
    outputs_.push_back(name);
    return flags_.out / name;
  }

  void write_manifest() const {
    ordered_json j;
    j["tool"] = "mfract";
    j["version"] = kVersion;
    j["command"] = command_;
    j["seed"] = flags_.seed;
    j["argv"] = argv_;
    j["config"] = config_;
    ordered_json inputs = ordered_json::array();
    for (const auto& p : inputs_) {
      std::optional<std::string> digest;
      try {
        digest = sha256_file(p);
      } catch (const std::exception&) {
      }
      inputs.push_back({{"path", p.string()}, {"sha256", digest ? *digest : ""}});
    }
    j["inputs"] = inputs;
    j["outputs"] = outputs_;
    const fs::path path = flags_.manifest.empty() ? flags_.out / "manifest.json" : flags_.manifest;
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << j.dump(2) << '\n';
  }

 private:
  std::string command_;
  CommonFlags flags_;
  std::vector<std::string> argv_;
  std::ostream& out_;
  std::ostream& err_;
  ordered_json config_ = ordered_json::object();
  std::vector<fs::path> inputs_;
  std::vector<std::string> outputs_;
};

GrayImage load_gray(const fs::path& p) { return to_gray(decode(p)); }

// ---- fd -------------------------------------------------------------------

struct FdFlags {
  std::vector<fs::path> inputs;
  int scale = 4;
  std::vector<std::size_t> sizes;
};

int cmd_fd(Run& run, const FdFlags& f) {
  if (f.scale < 2) throw Error("--scale must be at least 2");
  run.config() = {{"scale", f.scale},
                  {"sizes", f.sizes.empty() ? ordered_json("default") : ordered_json(f.sizes)},
                  {"default_sizes", boxcount::kDefaultSizes},
                  {"gray_levels", 256},
                  {"resize", "bicubic"}};

  std::ostringstream csv;
  csv << "path,fd_hr,fd_lr,diff,r2_hr,r2_lr\n";
  std::array<double, 5> sums{};
  std::size_t ok = 0;
  for (const auto& p : f.inputs) {
    run.input(p);
    try {
      const GrayImage hr = load_gray(p);
      const GrayImage lr = resize_bicubic(hr, Scale{1, f.scale});
      const boxcount::FdGap gap = boxcount::fd_gap(hr, lr, f.sizes);
      for (const auto& w : gap.hr.warnings) run.warn(p.string() + " (hr): " + w);
      for (const auto& w : gap.lr.warnings) run.warn(p.string() + " (lr): " + w);
      const std::array<double, 5> row{gap.hr.dimension, gap.lr.dimension, gap.diff,
                                      gap.hr.r_squared, gap.lr.r_squared};
      csv << csv_field(p.string());
      for (std::size_t i = 0; i < row.size(); ++i) {
        csv << ',' << num(row[i]);
        sums[i] += row[i];
      }
      csv << '\n';
      ++ok;
    } catch (const std::exception& e) {
      run.err() << "error: " << p.string() << ": " << e.what() << '\n';
    }
  }
  if (ok > 0) {
    csv << "MEAN";
    for (double s : sums) csv << ',' << num(s / static_cast<double>(ok));
    csv << '\n';
  }
  std::ofstream(run.output("fd.csv")) << csv.str();
  run.info("fd: " + std::to_string(ok) + "/" + std::to_string(f.inputs.size()) + " images" +
           (ok > 0 ? ", mean diff " + num(sums[2] / static_cast<double>(ok)) : ""));
  return ok > 0 ? kOk : kFailed;
}

// ---- spectrum -------------------------------------------------------------

struct SpectrumFlags {
  fs::path input;
  std::size_t bins = mfspec::kDefaultAlphaBins;
  std::vector<std::size_t> boxes = mfspec::kDefaultBoxSizes;
  std::string fit = "origin";
};

int cmd_spectrum(Run& run, const SpectrumFlags& f) {
  run.config() = {{"bins", f.bins},
                  {"boxes", f.boxes},
                  {"fit", f.fit},
                  {"min_scales_per_bin", mfspec::kMinScalesPerBin}};
  run.input(f.input);
  const mfspec::SpectrumFit fit =
      f.fit == "affine" ? mfspec::SpectrumFit::affine : mfspec::SpectrumFit::through_origin;
  const mfspec::SpectrumCurve curve = mfspec::spectrum_from_image(load_gray(f.input), f.boxes, f.bins, fit);
  for (const auto& w : curve.warnings) run.warn(w);
  mfspec::write_spectrum_csv(run.output("spectrum.csv"), curve);
  mfspec::write_spectrum_json(run.output("spectrum.json"), curve);
  run.info("spectrum: " + std::to_string(curve.alphas.size()) + " bins, width " + num(curve.width) +
           ", peak alpha " + num(curve.peak_alpha));
  return kOk;
}

// ---- density --------------------------------------------------------------

struct DensityFlags {
  fs::path input;
  std::vector<std::size_t> windows{3, 5, 7, 9};
  std::string method = "closed";
  std::string denominator = "difference";
};

int cmd_density(Run& run, const DensityFlags& f) {
  density::DensityFitConfig cfg;
  cfg.window_sizes = f.windows;
  cfg.denominator =
      f.denominator == "sum" ? density::SlopeDenominator::sum : density::SlopeDenominator::difference;
  cfg.validate();
  run.config() = {{"windows", cfg.window_sizes},
                  {"method", f.method},
                  {"denominator", f.denominator},
                  {"epsilon_floor", cfg.epsilon_floor},
                  {"padding", "reflect101"}};
  run.input(f.input);

  const density::MeasureStack stack = density::measure_stack(load_gray(f.input), cfg);
  std::optional<density::DensityMap> exact, closed;
  if (f.method != "closed") exact = density::density_exact(stack, cfg);
  if (f.method != "exact") closed = density::density_closed_form(stack, cfg);
  const density::DensityMap& map = closed ? *closed : *exact;

  density::write_normalized_pgm(run.output("density.pgm"), map.d);
  write_pfm(run.output("density.pfm"), map.d);
  density::write_summary_csv(run.output("density_summary.csv"), map.d);
  const density::MapSummary s = density::summarize(map.d);
  run.info("density: min " + num(s.min) + ", max " + num(s.max) + ", mean " + num(s.mean));
  if (exact && closed) {
    // Printed even with --quiet: it is the reason to ask for both.
    run.result("max_abs_diff " + num(density::max_abs_difference(exact->d, closed->d)));
  }
  return kOk;
}

// ---- group ----------------------------------------------------------------

struct GroupFlags {
  fs::path input;
  std::size_t anchors = 64;
  double sharpness = 1.0;
  std::vector<std::size_t> windows{3, 5, 7, 9};
};

int cmd_group(Run& run, const GroupFlags& f) {
  grouping::MfbConfig cfg;
  cfg.anchors = f.anchors;
  cfg.sharpness = f.sharpness;
  cfg.density.window_sizes = f.windows;
  cfg.group.seed = run.flags().seed;
  run.config() = {{"anchors", cfg.anchors},
                  {"sharpness", cfg.sharpness},
                  {"out_channels", cfg.out_channels},
                  {"windows", cfg.density.window_sizes},
                  {"scales", cfg.group.scales},
                  {"split", cfg.group.split.empty() ? ordered_json("quarters") : ordered_json(cfg.group.split)}};
  run.input(f.input);

  const GrayImage img = load_gray(f.input);
  // The grouped processor splits channels into quarters, so other anchor
  // counts stop after the membership stack.
  const bool full = cfg.anchors % 4 == 0;
  grouping::MfbResult res;
  if (full) {
    res = grouping::mfb_forward(img, cfg);
  } else {
    if (img.height() < grouping::kMinMfbSide || img.width() < grouping::kMinMfbSide) {
      throw Error("multi-fractal block needs an image of at least 32x32");
    }
    res.density = density::density_from_image(img, cfg.density);
    res.anchors = grouping::init_anchors(res.density.d, cfg.anchors);
    std::fill(res.anchors.sharpness.begin(), res.anchors.sharpness.end(), cfg.sharpness);
    res.membership = grouping::soft_assign(res.density.d, res.anchors);
    run.warn(std::to_string(cfg.anchors) + " anchors do not split into four groups; mfb.pfm not written");
  }
  if (res.anchors.degenerate) run.warn("flat density map: all anchors coincide");
  std::vector<RealGrid> pages(res.membership.begin(), res.membership.end());
  write_pgm_pages(run.output("membership.pgm"), pages);
  grouping::write_anchors_json(run.output("anchors.json"), res.anchors);
  if (!full) {
    run.info("group: " + std::to_string(res.membership.channels()) + " memberships");
    return kOk;
  }
  write_pfm(run.output("mfb.pfm"), res.output);
  run.info("group: " + std::to_string(res.membership.channels()) + " memberships, mfb output " +
           std::to_string(res.output.height()) + "x" + std::to_string(res.output.width()) + "x" +
           std::to_string(res.output.channels()));
  return kOk;
}

// ---- filter ---------------------------------------------------------------

struct FilterFlags {
  fs::path input;
  std::string attention = "identity";
  std::size_t report_bands = 4;
};

spectral::AttentionMap parse_attention(Run& run, const std::string& text, std::size_t h,
                                       std::size_t w) {
  if (text == "identity") return spectral::AttentionMap::identity(h, w);
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error("unknown attention '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  if (kind == "file") {
    run.input(arg);
    return spectral::AttentionMap::from_pfm(arg);
  }
  double radius = 0.0;
  const auto res = std::from_chars(arg.data(), arg.data() + arg.size(), radius);
  if (res.ec != std::errc() || res.ptr != arg.data() + arg.size()) {
    throw Error("attention radius '" + arg + "' is not a number");
  }
  if (kind == "lowpass") return spectral::AttentionMap::lowpass(h, w, radius);
  if (kind == "highpass") return spectral::AttentionMap::highpass(h, w, radius);
  throw Error("unknown attention '" + text + "'");
}

FeatureStack planes_of(const ImageTensor& t) {
  std::vector<RealGrid> planes;
  for (std::size_t c = 0; c < t.channels(); ++c) planes.push_back(t.channel(c));
  return FeatureStack(std::move(planes));
}

int cmd_filter(Run& run, const FilterFlags& f) {
  run.config() = {{"attention", f.attention}, {"report_bands", f.report_bands}, {"layout", "unshifted"}};
  run.input(f.input);
  const ImageTensor img = decode(f.input);
  const spectral::AttentionMap att = parse_attention(run, f.attention, img.height(), img.width());
  if (!att.conjugate_symmetric()) run.warn("attention is not conjugate symmetric; imaginary part discarded");
  const spectral::TensorFilterResult res = spectral::apply_filter(img, att);
  if (res.imag_residue > 1e-9) run.warn("discarded imaginary residue " + num(res.imag_residue));

  ImageTensor clamped = res.image;
  for (double& v : clamped.values()) v = std::clamp(v, 0.0, 1.0);
  encode(run.output("filtered.png"), clamped);
  write_pfm(run.output("filtered.pfm"), planes_of(res.image));

  if (f.report_bands > 0) {
    const auto bands = spectral::equal_bands(f.report_bands);
    std::vector<spectral::ComplexGrid> in_spec, out_spec;
    double spatial_in = 0.0, spatial_out = 0.0;
    const double bins = static_cast<double>(img.height() * img.width());
    for (std::size_t c = 0; c < img.channels(); ++c) {
      const RealGrid a = img.channel(c);
      const RealGrid b = res.image.channel(c);
      in_spec.push_back(spectral::fft2(a));
      out_spec.push_back(spectral::fft2(b));
      spatial_in += bins * spectral::spatial_energy(a);
      spatial_out += bins * spectral::spatial_energy(b);
    }
    std::ofstream csv(run.output("bands.csv"));
    csv << "band,lo,hi,energy_in,energy_out\n";
    double total_in = 0.0, total_out = 0.0;
    for (std::size_t i = 0; i < bands.size(); ++i) {
      double e_in = 0.0, e_out = 0.0;
      try {
        for (std::size_t c = 0; c < in_spec.size(); ++c) {
          e_in += spectral::band_energy(in_spec[c], bands[i]);
          e_out += spectral::band_energy(out_spec[c], bands[i]);
        }
      } catch (const Error&) {
        // a band narrower than the bin spacing holds no bins: zero energy
      }
      total_in += e_in;
      total_out += e_out;
      csv << i << ',' << num(bands[i].lo) << ',' << num(bands[i].hi) << ',' << num(e_in) << ','
          << num(e_out) << '\n';
    }
    // Parseval: the band total equals H*W times the pixel-domain energy.
    csv << "total,0," << num(spectral::kMaxRadialFrequency) << ',' << num(total_in) << ','
        << num(total_out) << '\n';
    csv << "spatial,0," << num(spectral::kMaxRadialFrequency) << ',' << num(spatial_in) << ','
        << num(spatial_out) << '\n';
  }
  run.info("filter: " + f.attention + ", imaginary residue " + num(res.imag_residue));
  return kOk;
}

// ---- schedule -------------------------------------------------------------

struct ScheduleFlags {
  std::size_t steps = diffusion::kDefaultSteps;
  double beta_start = diffusion::kDefaultBetaStart;
  double beta_end = diffusion::kDefaultBetaEnd;
  bool verify = false;
  std::size_t trials = 10000;
};

constexpr double kRoundtripTol = 1e-9;
constexpr double kChainMaxZ = 4.0;

int verify_schedule(Run& run, const diffusion::NoiseSchedule& sched, const ScheduleFlags& f) {
  Rng rng(run.flags().seed);
  RealGrid x0(8, 8);
  for (double& v : x0.values()) v = 2.0 * rng.uniform() - 1.0;
  RealGrid noise(8, 8);
  for (double& v : noise.values()) v = rng.normal();

  bool pass = true;
  auto report = [&](const std::string& what, bool ok) {
    pass = pass && ok;
    run.result(std::string(ok ? "PASS " : "FAIL ") + what);
  };
  for (std::size_t t : {1, 10, 100, 500, 1000}) {
    if (t > sched.steps()) continue;
    const RealGrid xt = diffusion::q_sample(x0, t, noise, sched);
    const double err = density::max_abs_difference(diffusion::invert_x0(xt, t, noise, sched), x0);
    report("roundtrip t=" + std::to_string(t) + " max_err=" + num(err), err <= kRoundtripTol);
  }
  for (std::size_t t : {1, 50, 100}) {
    if (t > sched.steps()) continue;
    const diffusion::ChainReport rep =
        diffusion::chain_equals_marginal(x0, t, sched, run.flags().seed + t, f.trials);
    report("chain t=" + std::to_string(t) + " max_z=" + num(rep.max_abs_z()), rep.max_abs_z() < kChainMaxZ);
  }
  {
    const RealGrid x1 = diffusion::q_sample(x0, 1, noise, sched);
    const RealGrid back = diffusion::posterior_step(x1, 1, noise, sched, RealGrid(8, 8, 0.0));
    const double err = density::max_abs_difference(back, x0);
    report("posterior t=1 max_err=" + num(err), err <= kRoundtripTol);
  }
  return pass ? kOk : kFailed;
}

int cmd_schedule(Run& run, const ScheduleFlags& f) {
  run.config() = {{"T", f.steps},
                  {"beta_start", f.beta_start},
                  {"beta_end", f.beta_end},
                  {"verify", f.verify},
                  {"trials", f.trials}};
  const diffusion::NoiseSchedule sched = diffusion::linear_schedule(f.steps, f.beta_start, f.beta_end);
  diffusion::write_schedule_csv(run.output("schedule.csv"), sched);
  run.info("schedule: T=" + std::to_string(sched.steps()) + ", alpha_bar(T)=" +
           num(sched.alpha_bar(sched.steps())));
  return f.verify ? verify_schedule(run, sched, f) : kOk;
}

// ---- replay ---------------------------------------------------------------

std::vector<std::string> replay_args(const fs::path& manifest, const std::optional<fs::path>& out,
                                     std::ostream& err) {
  std::ifstream in(manifest);
  if (!in) throw Error("cannot read manifest " + manifest.string());
  const ordered_json j = ordered_json::parse(in);
  for (const auto& entry : j.at("inputs")) {
    const std::string path = entry.at("path");
    const std::string expected = entry.at("sha256");
    if (sha256_file(path) != expected) throw Error("input " + path + " changed since the manifest was written");
  }
  std::vector<std::string> args;
  const auto stored = j.at("argv").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < stored.size(); ++i) {
    if (out && stored[i] == "--out") {
      ++i;
      continue;
    }
    if (out && stored[i].rfind("--out=", 0) == 0) continue;
    args.push_back(stored[i]);
  }
  if (out) {
    args.push_back("--out");
    args.push_back(out->string());
  }
  if (j.at("version") != kVersion) {
    err << "warning: manifest written by version " << j.at("version").get<std::string>() << '\n';
  }
  return args;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 0xF];
  }
  return hex;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractal and spectral texture analysis", "mfract"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(0, 1);

  fs::path replay;
  fs::path replay_out;
  app.add_option("--replay", replay, "Re-run the command recorded in a manifest");
  app.add_option("--out", replay_out, "With --replay: write outputs here instead");

  CommonFlags common;

  FdFlags fd;
  auto* fd_cmd = app.add_subcommand("fd", "Fractal dimension of HR images and their bicubic downsamples");
  fd_cmd->add_option("inputs", fd.inputs, "Images")->required();
  fd_cmd->add_option("--scale", fd.scale, "Downsampling factor")->capture_default_str();
  fd_cmd->add_option("--sizes", fd.sizes, "Box sizes in pixels")->delimiter(',');
  add_common(fd_cmd, common);

  SpectrumFlags sp;
  auto* sp_cmd = app.add_subcommand("spectrum", "Multifractal spectrum f(alpha)");
  sp_cmd->add_option("input", sp.input, "Image")->required();
  sp_cmd->add_option("--bins", sp.bins, "Alpha bins")->capture_default_str();
  sp_cmd->add_option("--boxes", sp.boxes, "Box sizes in pixels")->delimiter(',')->capture_default_str();
  sp_cmd->add_option("--fit", sp.fit, "Scaling fit per bin: origin or affine")
      ->check(CLI::IsMember({"origin", "affine"}))
      ->capture_default_str();
  add_common(sp_cmd, common);

  DensityFlags de;
  auto* de_cmd = app.add_subcommand("density", "Per-pixel fractal density map");
  de_cmd->add_option("input", de.input, "Image")->required();
  de_cmd->add_option("--windows", de.windows, "Odd window sizes")->delimiter(',')->capture_default_str();
  de_cmd->add_option("--method", de.method, "exact, closed or both")
      ->check(CLI::IsMember({"exact", "closed", "both"}))
      ->capture_default_str();
  de_cmd->add_option("--denominator", de.denominator, "Slope denominator: difference or sum")
      ->check(CLI::IsMember({"difference", "sum"}))
      ->capture_default_str();
  add_common(de_cmd, common);

  GroupFlags gr;
  auto* gr_cmd = app.add_subcommand("group", "Soft grouping and the multi-fractal block forward pass");
  gr_cmd->add_option("input", gr.input, "Image")->required();
  gr_cmd->add_option("--anchors", gr.anchors, "Anchor count K")->check(CLI::PositiveNumber)->capture_default_str();
  gr_cmd->add_option("--sharpness", gr.sharpness, "Softmax sharpness")->check(CLI::PositiveNumber)->capture_default_str();
  gr_cmd->add_option("--windows", gr.windows, "Density window sizes")->delimiter(',')->capture_default_str();
  add_common(gr_cmd, common);

  FilterFlags fi;
  auto* fi_cmd = app.add_subcommand("filter", "Frequency-domain attention filter");
  fi_cmd->add_option("input", fi.input, "Image")->required();
  fi_cmd->add_option("--attention", fi.attention, "identity, lowpass:R, highpass:R or file:PATH")
      ->capture_default_str();
  fi_cmd->add_option("--report-bands", fi.report_bands, "Radial bands in bands.csv (0 = none)")
      ->capture_default_str();
  add_common(fi_cmd, common);

  ScheduleFlags sc;
  auto* sc_cmd = app.add_subcommand("schedule", "Linear noise schedule and its checks");
  sc_cmd->add_option("--T", sc.steps, "Steps")->check(CLI::Range(2, 1000000))->capture_default_str();
  sc_cmd->add_option("--beta-start", sc.beta_start)->capture_default_str();
  sc_cmd->add_option("--beta-end", sc.beta_end)->capture_default_str();
  sc_cmd->add_flag("--verify", sc.verify, "Run chain and roundtrip checks");
  sc_cmd->add_option("--trials", sc.trials, "Monte Carlo trials per chain check")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000000}))
      ->capture_default_str();
  add_common(sc_cmd, common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  const auto subs = app.get_subcommands();
  if (subs.empty()) {
    if (replay.empty()) {
      err << app.help();
      return kUsage;
    }
    try {
      const std::optional<fs::path> out_override =
          replay_out.empty() ? std::nullopt : std::optional<fs::path>(replay_out);
      return run(replay_args(replay, out_override, err), out, err);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kFailed;
    }
  }

  CLI::App* sub = subs.front();
  Run r(sub->get_name(), common, args, out, err);
  int code = kUsage;
  try {
    fs::create_directories(common.out);
    if (sub == fd_cmd) code = cmd_fd(r, fd);
    if (sub == sp_cmd) code = cmd_spectrum(r, sp);
    if (sub == de_cmd) code = cmd_density(r, de);
    if (sub == gr_cmd) code = cmd_group(r, gr);
    if (sub == fi_cmd) code = cmd_filter(r, fi);
    if (sub == sc_cmd) code = cmd_schedule(r, sc);
    r.write_manifest();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailed;
  }
  return code;
}

}  // namespace mfract::cli

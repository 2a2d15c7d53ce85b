// angcorr: command-line front end.
//
//   angcorr transform --model c2 --ell-max 2000
//   angcorr toy1 --case b
//   angcorr mc --case b --seed 7
//   angcorr toy2 --variant distance
//   angcorr analyze --input transform_legendre_c2.csv
//
// Exit status: 0 success, 1 usage or parameter error, 2 computation error.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "angcorr/angcorr.hpp"

namespace fs = std::filesystem;
using namespace angcorr;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bare numbers are degrees; "deg" and "rad" suffixes are accepted.
double parse_angle(const std::string& text, const std::string& flag) {
  std::string s(io::trim(text));
  double scale = deg_to_rad(1.0);
  auto strip = [&](const std::string& suffix, double sc) {
    if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
      s.erase(s.size() - suffix.size());
      scale = sc;
      return true;
    }
    return false;
  };
  if (!strip("deg", deg_to_rad(1.0))) strip("rad", 1.0);
  try {
    return io::parse_number(io::trim(s), flag, 0) * scale;
  } catch (const angcorr::ParseError&) {
    throw UsageError("--" + flag + ": expected an angle such as 1.5deg or 0.02rad, got '" + text + "'");
  }
}

std::string fmt(double v) { return io::format_double(v); }
std::string fmt_deg(double rad) { return io::format_rounded(rad_to_deg(rad)); }

struct Settings {
  // global
  std::uint64_t seed = 0;
  std::string config;
  std::string out_dir = ".";
  unsigned threads = 1;
  bool gnuplot = false;

  // transform
  std::string mode = "legendre";
  std::string model;
  std::string input;
  std::vector<std::string> params;
  int ell_max = 2000;
  std::optional<double> k_min, k_max;
  int k_count = 2001;
  bool zero_beyond = false;
  int nodes = 4096;
  std::string theta_max = "180deg";
  int theta_count = 1801;
  std::string output;

  // toy1 / mc shared
  std::string toy_case;
  double nc = 0.0;
  std::string R = "1deg";
  std::optional<std::string> theta_min;
  std::optional<std::string> toy_theta_max;
  int toy_theta_count = 64;

  // mc
  int np = 100;
  std::string L = "1rad";
  std::optional<std::string> R_min, R_max;
  bool hard_core = false;
  int realizations = 50;
  int bins = 64;
  std::string field = "disks";
  double packing_limit = 1.6;

  // toy2
  std::string variant = "uniform";
  std::string R_min2 = "1deg", R_max2 = "2deg";
  double A0 = 0.02, Ldist = 1.0, r_min = 3.0, r_max = 50.0;
  int spec_theta_count = 1801;

  // analyze
  std::string weight = "auto";
  int smoothing = 5;
  double prominence = 0.01;
  double regularity = 0.5;
};

struct Cli {
  CLI::App app{"Angular correlation functions, power spectra and disk-field toy models", "angcorr"};
  CLI::App* transform = nullptr;
  CLI::App* toy1 = nullptr;
  CLI::App* toy2 = nullptr;
  CLI::App* mc = nullptr;
  CLI::App* analyze = nullptr;
};

void build(Cli& cli, Settings& s) {
  auto& app = cli.app;
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(angcorr::version));
  app.add_option("--seed", s.seed, "Random seed")->capture_default_str();
  app.add_option("--config", s.config, "key = value file; keys are long option names without dashes");
  app.add_option("--out-dir", s.out_dir, "Directory for output files")->capture_default_str();
  app.add_option("--threads", s.threads, "Worker threads (results do not depend on it)")
      ->capture_default_str()
      ->check(CLI::Range(1u, 1024u));
  app.add_flag("--gnuplot", s.gnuplot, "Also write a gnuplot script next to each CSV");

  // Global options may also follow the subcommand name.
  app.fallthrough();

  auto* t = cli.transform = app.add_subcommand("transform", "Correlation function <-> power spectrum");
  t->add_option("--mode", s.mode, "legendre | smallangle | inverse")
      ->capture_default_str()
      ->check(CLI::IsMember({"legendre", "smallangle", "inverse"}));
  t->add_option("--model", s.model, "c1 | c2 | toy2_uniform | toy2_distance");
  t->add_option("--input", s.input, "Correlation CSV (theta_deg,C) or spectrum CSV (ell,C_ell)");
  t->add_option("--param", s.params, "Model parameter override KEY=VALUE (repeatable)");
  t->add_option("--ell-max", s.ell_max, "Largest multipole")->capture_default_str()->check(CLI::NonNegativeNumber);
  t->add_option("--k-min", s.k_min, "Small-angle grid start (default: l + 1/2 grid)");
  t->add_option("--k-max", s.k_max, "Small-angle grid end");
  t->add_option("--k-count", s.k_count, "Small-angle grid size")->capture_default_str()->check(CLI::Range(2, 10000000));
  t->add_flag("--zero-beyond", s.zero_beyond, "Treat a tabulated correlation as zero beyond its last angle");
  t->add_option("--nodes", s.nodes, "Gauss-Legendre nodes per segment")->capture_default_str()->check(CLI::Range(2, 1 << 20));
  t->add_option("--theta-max", s.theta_max, "Inverse mode: largest angle")->capture_default_str();
  t->add_option("--theta-count", s.theta_count, "Inverse mode: grid size")->capture_default_str()->check(CLI::Range(2, 10000000));
  t->add_option("--output", s.output, "Output file name");
  t->get_option("--model")->excludes(t->get_option("--input"));

  auto* a = cli.toy1 = app.add_subcommand("toy1", "Analytic correlation of equal-disk fields");
  a->add_option("--case", s.toy_case, "a | b | c | d")->required()->check(CLI::IsMember({"a", "b", "c", "d"}));
  a->add_option("--nc", s.nc, "Number of disks on the sphere (default 1000)");
  a->add_option("--R", s.R, "Disk radius")->capture_default_str();
  a->add_option("--theta-min", s.theta_min, "First angle (default: centers of equal bins)");
  a->add_option("--theta-max", s.toy_theta_max, "Last angle / upper bin edge (default 4R)");
  a->add_option("--theta-count", s.toy_theta_count, "Number of angles")->capture_default_str()->check(CLI::Range(1, 1000000));
  a->add_option("--output", s.output, "Output file name");

  auto* m = cli.mc = app.add_subcommand("mc", "Monte Carlo disk fields and pair-count correlation");
  m->add_option("--case", s.toy_case, "a (Poisson centers) | b (hard core)")->check(CLI::IsMember({"a", "b"}));
  m->add_option("--nc", s.nc, "Disks per realization (default 80)");
  m->add_option("--np", s.np, "Points per disk")->capture_default_str()->check(CLI::PositiveNumber);
  m->add_option("--L", s.L, "Side of the square patch")->capture_default_str();
  m->add_option("--R", s.R, "Disk radius")->capture_default_str();
  m->add_option("--R-min", s.R_min, "Smallest radius (radii uniform in [R-min, R-max])");
  m->add_option("--R-max", s.R_max, "Largest radius");
  m->add_flag("--hard-core", s.hard_core, "Forbid overlapping disks");
  m->add_option("--realizations", s.realizations, "Number of realizations")->capture_default_str()->check(CLI::PositiveNumber);
  m->add_option("--bins", s.bins, "Linear separation bins")->capture_default_str()->check(CLI::PositiveNumber);
  m->add_option("--theta-max", s.toy_theta_max, "Upper edge of the last bin (default 4R)");
  m->add_option("--field", s.field, "disks | uniform")->capture_default_str()->check(CLI::IsMember({"disks", "uniform"}));
  m->add_option("--packing-limit", s.packing_limit, "Hard-core feasibility bound")->capture_default_str();
  m->add_option("--output", s.output, "Output file name");

  auto* w = cli.toy2 = app.add_subcommand("toy2", "Variable-radius disk models: correlation and spectrum");
  w->add_option("--variant", s.variant, "uniform | distance")->capture_default_str()->check(CLI::IsMember({"uniform", "distance"}));
  w->add_option("--R-min", s.R_min2, "uniform: smallest radius")->capture_default_str();
  w->add_option("--R-max", s.R_max2, "uniform: largest radius")->capture_default_str();
  w->add_option("--A0", s.A0, "distance: amplitude scale")->capture_default_str();
  w->add_option("--L", s.Ldist, "distance: object size")->capture_default_str();
  w->add_option("--r-min", s.r_min, "distance: nearest object")->capture_default_str();
  w->add_option("--r-max", s.r_max, "distance: farthest object")->capture_default_str();
  w->add_option("--ell-max", s.ell_max, "Largest multipole")->capture_default_str()->check(CLI::NonNegativeNumber);
  w->add_option("--theta-count", s.spec_theta_count, "Correlation grid size on [0, 180] deg")
      ->capture_default_str()
      ->check(CLI::Range(2, 10000000));

  auto* z = cli.analyze = app.add_subcommand("analyze", "Peak analysis of a spectrum CSV");
  z->add_option("--input", s.input, "Spectrum CSV")->required();
  z->add_option("--weight", s.weight, "auto | band | none (band: l(l+1)C_l/2pi)")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "band", "none"}));
  z->add_option("--smoothing", s.smoothing, "Moving-average window")->capture_default_str()->check(CLI::PositiveNumber);
  z->add_option("--prominence", s.prominence, "Prominence fraction")->capture_default_str();
  z->add_option("--regularity", s.regularity, "Regularity threshold")->capture_default_str();
  z->add_option("--output", s.output, "Output file name");
}

// ---------------------------------------------------------------------------

io::Manifest base_manifest(const std::string& command, const Settings& s) {
  return {{"tool", std::string("angcorr ") + angcorr::version}, {"command", command}, {"seed", std::to_string(s.seed)}};
}

fs::path output_path(const Settings& s, const std::string& fallback) {
  fs::create_directories(s.out_dir);
  return fs::path(s.out_dir) / (s.output.empty() ? fallback : s.output);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

void write_gnuplot(const Settings& s, const fs::path& csv, const std::string& xlabel, const std::string& ylabel,
                   const std::string& using_cols, bool logy) {
  if (!s.gnuplot) return;
  fs::path gp = csv;
  gp.replace_extension(".gp");
  auto os = open_out(gp);
  os << "set datafile separator ','\nset datafile commentschars '#'\n";
  os << "set xlabel '" << xlabel << "'\nset ylabel '" << ylabel << "'\n";
  if (logy) os << "set logscale y\n";
  os << "plot '" << csv.filename().string() << "' skip 1 using " << using_cols << " with lines notitle\n";
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

void print_peaks(const PowerSpectrum& spec, const char* label) {
  try {
    const auto peaks = find_peaks(spec);
    std::cout << label << ": " << peaks.size() << " peaks";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, peaks.size()); ++i) {
      std::cout << (i == 0 ? " at " : ", ") << fmt(std::round(peaks[i].location * 10.0) / 10.0);
    }
    std::cout << '\n';
  } catch (const DomainError&) {
    std::cout << label << ": spectrum too short for peak search\n";
  }
}

ModelParams parse_params(const std::vector<std::string>& items) {
  ModelParams out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--param expects KEY=VALUE, got '" + item + "'");
    const std::string key(io::trim(std::string_view(item).substr(0, eq)));
    try {
      out[key] = io::parse_number(io::trim(std::string_view(item).substr(eq + 1)), "--param", 0);
    } catch (const angcorr::ParseError&) {
      throw UsageError("--param " + key + ": not a number");
    }
  }
  return out;
}

int cmd_transform(const Settings& s) {
  if (s.model.empty() == s.input.empty()) throw UsageError("transform: give exactly one of --model or --input");
  TransformOptions opts;
  opts.nodes = static_cast<std::size_t>(s.nodes);
  opts.threads = s.threads;
  opts.extrapolation = s.zero_beyond ? Extrapolation::ZeroBeyond : Extrapolation::Error;

  auto manifest = base_manifest("transform", s);
  manifest.emplace_back("mode", s.mode);
  std::optional<CorrelationModel> model;
  std::optional<TabulatedCorrelation> table;
  std::optional<PowerSpectrum> series;
  std::string source_name;
  if (!s.model.empty()) {
    model = model_from_params(parse_model_kind(s.model), parse_params(s.params));
    source_name = std::string(model_name(model->kind()));
    manifest.emplace_back("model", source_name);
    for (const auto& [k, v] : model_to_params(*model)) manifest.emplace_back(k, io::format_rounded(v));
  } else {
    if (!s.params.empty()) throw UsageError("transform: --param only applies to --model");
    const auto t = io::read_table_file(s.input);
    source_name = stem(s.input);
    manifest.emplace_back("input", s.input);
    if (t.column("theta_deg")) {
      table = io::correlation_from_table(t, s.input);
    } else {
      series = io::spectrum_from_table(t, s.input);
      if (!series->is_contiguous_multipole()) {
        throw angcorr::ParseError(s.input, 1, "spectrum input must list l = 0, 1, ..., l_max");
      }
    }
    manifest.emplace_back("zero_beyond", s.zero_beyond ? "true" : "false");
  }
  manifest.emplace_back("nodes", std::to_string(s.nodes));

  const fs::path out = output_path(s, "transform_" + s.mode + "_" + source_name + ".csv");
  if (s.mode == "inverse") {
    if (!series) throw UsageError("transform --mode inverse needs a spectrum CSV as --input");
    const double tmax = parse_angle(s.theta_max, "theta-max");
    if (!(tmax > 0.0) || tmax > pi * (1.0 + 1e-12)) throw UsageError("--theta-max must lie in (0, 180] deg");
    const auto grid = linear_grid(0.0, std::min(tmax, pi), static_cast<std::size_t>(s.theta_count));
    manifest.emplace_back("theta_max_deg", fmt_deg(tmax));
    manifest.emplace_back("theta_count", std::to_string(s.theta_count));
    const auto corr = correlation_from_spectrum(*series, grid);
    auto os = open_out(out);
    io::write_correlation(os, corr, manifest);
    write_gnuplot(s, out, "theta [deg]", "C(theta)", "1:2", false);
    std::cout << "wrote " << out.string() << '\n';
    return 0;
  }

  PowerSpectrum spec;
  auto run = [&](const auto& corr) {
    if (s.mode == "legendre") {
      spec = legendre_coefficients(corr, s.ell_max, opts);
    } else {
      std::vector<double> k;
      if (s.k_min || s.k_max) {
        if (!s.k_min || !s.k_max) throw UsageError("give both --k-min and --k-max");
        k = linear_grid(*s.k_min, *s.k_max, static_cast<std::size_t>(s.k_count));
      } else {
        k = multipole_frequencies(s.ell_max);
      }
      spec = small_angle_spectrum(corr, k, opts);
      if constexpr (AngularFunction<std::decay_t<decltype(corr)>>) {
        const double tail = small_angle_tail_fraction(corr, deg_to_rad(5.0));
        if (tail > 0.01) {
          std::cerr << "warning: " << fmt(std::round(tail * 1000.0) / 10.0)
                    << "% of |C| lies beyond 5 deg; the small-angle spectrum is only approximate\n";
        }
      }
    }
  };
  if (model) {
    run(*model);
  } else if (table) {
    run(*table);
  } else {
    run(LegendreSeries{*series});
  }
  manifest.emplace_back("ell_max", std::to_string(s.ell_max));
  if (s.mode == "smallangle" && s.k_min) {
    manifest.emplace_back("k_min", fmt(*s.k_min));
    manifest.emplace_back("k_max", fmt(*s.k_max));
    manifest.emplace_back("k_count", std::to_string(s.k_count));
  }
  if (spec.negative_beyond_tolerance()) {
    std::cerr << "note: spectrum has negative values beyond the quadrature tolerance\n";
  }
  auto os = open_out(out);
  io::write_spectrum(os, spec, manifest);
  write_gnuplot(s, out, spec.kind == GridKind::Multipole ? "l" : "k", "C_l", "1:2", false);
  std::cout << "wrote " << out.string() << '\n';
  if (spec.kind == GridKind::Multipole && spec.size() >= 16) {
    print_peaks(band_power(spec), "l(l+1)C_l/2pi");
  } else if (spec.size() >= 16) {
    print_peaks(spec, "P(k)");
  }
  return 0;
}

std::vector<double> toy_theta_grid(const Settings& s, double R) {
  const double tmax = s.toy_theta_max ? parse_angle(*s.toy_theta_max, "theta-max") : 4.0 * R;
  const auto n = static_cast<std::size_t>(s.toy_theta_count);
  if (!(tmax > 0.0)) throw UsageError("--theta-max must be > 0");
  if (s.theta_min) {
    const double tmin = parse_angle(*s.theta_min, "theta-min");
    if (!(tmin > 0.0) || !(tmin < tmax || (n == 1 && tmin <= tmax))) {
      throw UsageError("need 0 < --theta-min < --theta-max");
    }
    if (n == 1) return {tmin};
    return linear_grid(tmin, tmax, n);
  }
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = tmax * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return grid;
}

int cmd_toy1(const Settings& s) {
  const double R = parse_angle(s.R, "R");
  const double nc = s.nc > 0.0 ? s.nc : 1000.0;
  const auto tc = toy1_case(s.toy_case.front(), R, nc);
  const auto grid = toy_theta_grid(s, R);
  Toy1Options opts;
  opts.threads = s.threads;
  const auto corr = correlation_toy1(grid, tc.profile, tc.omega, tc.N_c, opts);
  const double base = uncorrelated_baseline(tc.profile, tc.N_c);

  auto manifest = base_manifest("toy1", s);
  manifest.emplace_back("case", s.toy_case);
  manifest.emplace_back("N_c", fmt(nc));
  manifest.emplace_back("R_deg", fmt_deg(R));
  manifest.emplace_back("theta_min_deg", fmt_deg(grid.front()));
  manifest.emplace_back("theta_max_deg", fmt_deg(grid.back()));
  manifest.emplace_back("theta_count", std::to_string(grid.size()));
  manifest.emplace_back("uncorrelated_baseline", fmt(base));
  const fs::path out = output_path(s, "toy1_" + s.toy_case + ".csv");
  auto os = open_out(out);
  io::write_correlation(os, corr, manifest);
  write_gnuplot(s, out, "theta [deg]", "C(theta)", "1:2", false);
  std::cout << "wrote " << out.string() << "  (uncorrelated baseline " << fmt(base) << ")\n";
  return 0;
}

int cmd_mc(const Settings& s) {
  DiskEnsembleConfig cfg;
  cfg.N_c = s.nc > 0.0 ? static_cast<int>(std::lround(s.nc)) : 80;
  if (s.nc > 0.0 && std::abs(s.nc - std::round(s.nc)) > 0.0) throw UsageError("--nc must be an integer for mc");
  cfg.N_p = s.np;
  cfg.L_patch = parse_angle(s.L, "L");
  cfg.R = parse_angle(s.R, "R");
  if (s.R_min || s.R_max) {
    if (!s.R_min || !s.R_max) throw UsageError("give both --R-min and --R-max");
    cfg.radius_range = std::make_pair(parse_angle(*s.R_min, "R-min"), parse_angle(*s.R_max, "R-max"));
  }
  cfg.hard_core = s.hard_core || s.toy_case == "b";
  cfg.n_realizations = s.realizations;
  cfg.seed = s.seed;
  cfg.field = s.field == "uniform" ? FieldKind::Uniform : FieldKind::Disks;
  cfg.n_bins = s.bins;
  if (s.toy_theta_max) cfg.theta_max = parse_angle(*s.toy_theta_max, "theta-max");
  cfg.packing_limit = s.packing_limit;
  cfg.validate();

  const auto stats = run_ensemble(cfg, s.threads);

  auto manifest = base_manifest("mc", s);
  if (!s.toy_case.empty()) manifest.emplace_back("case", s.toy_case);
  manifest.emplace_back("field", s.field);
  manifest.emplace_back("N_c", std::to_string(cfg.N_c));
  manifest.emplace_back("N_p", std::to_string(cfg.N_p));
  if (cfg.radius_range) {
    manifest.emplace_back("R_min_deg", fmt_deg(cfg.radius_range->first));
    manifest.emplace_back("R_max_deg", fmt_deg(cfg.radius_range->second));
  } else {
    manifest.emplace_back("R_deg", fmt_deg(cfg.R));
  }
  manifest.emplace_back("L_patch_deg", fmt_deg(cfg.L_patch));
  manifest.emplace_back("hard_core", cfg.hard_core ? "true" : "false");
  manifest.emplace_back("realizations", std::to_string(cfg.n_realizations));
  manifest.emplace_back("bins", std::to_string(cfg.n_bins));
  manifest.emplace_back("theta_max_deg", fmt_deg(cfg.resolved_theta_max()));
  manifest.emplace_back("packing_limit", fmt(cfg.packing_limit));

  const std::string label = s.toy_case.empty() ? s.field : s.toy_case;
  const fs::path out = output_path(s, "mc_" + label + ".csv");
  auto os = open_out(out);
  io::write_manifest(os, manifest);
  os << "theta_deg,mean,rms,n_pairs\n";
  for (std::size_t b = 0; b < stats.n_bins(); ++b) {
    os << fmt_deg(stats.bin_center(b)) << ',' << io::format_optional(stats.mean[b]) << ','
       << io::format_optional(stats.rms[b]) << ',' << stats.pairs[b] << '\n';
  }
  write_gnuplot(s, out, "theta [deg]", "xi(theta)", "1:2:3 with yerrorbars", false);
  std::cout << "wrote " << out.string() << '\n';
  return 0;
}

PowerSpectrum analysis_weight(const PowerSpectrum& spec, const std::string& weight) {
  const bool band = weight == "band" || (weight == "auto" && spec.kind == GridKind::Multipole);
  if (!band) return spec;
  if (spec.kind != GridKind::Multipole) throw UsageError("--weight band needs a multipole spectrum");
  return band_power(spec);
}

void write_peak_report(const PeakReport& r, const fs::path& csv, const io::Manifest& manifest) {
  auto os = open_out(csv);
  io::write_manifest(os, manifest);
  os << "index,location,height,prominence\n";
  for (std::size_t i = 0; i < r.peaks.size(); ++i) {
    os << i << ',' << fmt(r.peaks[i].location) << ',' << fmt(r.peaks[i].height) << ',' << fmt(r.peaks[i].prominence)
       << '\n';
  }
  fs::path summary = csv;
  summary.replace_extension();
  summary += "_summary.txt";
  auto ss = open_out(summary);
  ss << "detected = " << (r.verdict.detected ? "true" : "false") << '\n';
  ss << "n_peaks = " << r.verdict.n_peaks << '\n';
  ss << "score = " << fmt(r.verdict.score) << '\n';
  ss << "regularity = " << fmt(r.verdict.regularity) << '\n';
  if (r.quasi_period) {
    ss << "quasi_period = " << fmt(r.quasi_period->mean) << '\n';
    ss << "quasi_period_dispersion = " << fmt(r.quasi_period->dispersion) << '\n';
  }
  if (r.envelope) {
    ss << "envelope_slope = " << fmt(r.envelope->slope) << '\n';
    ss << "envelope_slope_stderr = " << fmt(r.envelope->std_error) << '\n';
  }
}

std::string verdict_line(const PeakReport& r) {
  std::ostringstream os;
  os << "detected=" << (r.verdict.detected ? "true" : "false") << " n_peaks=" << r.verdict.n_peaks
     << " regularity=" << fmt(std::round(r.verdict.regularity * 1000.0) / 1000.0);
  if (r.quasi_period) {
    os << " quasi_period=" << fmt(std::round(r.quasi_period->mean * 10.0) / 10.0) << "+-"
       << fmt(std::round(r.quasi_period->dispersion * 10.0) / 10.0);
  }
  if (r.envelope) os << " envelope_slope=" << fmt(std::round(r.envelope->slope * 1000.0) / 1000.0);
  return os.str();
}

PeakOptions peak_options(const Settings& s) {
  PeakOptions po;
  po.smoothing_window = s.smoothing;
  po.prominence_frac = s.prominence;
  po.regularity_threshold = s.regularity;
  return po;
}

int cmd_toy2(const Settings& s) {
  ModelKind kind;
  ModelParams params;
  if (s.variant == "uniform") {
    kind = ModelKind::Toy2Uniform;
    params = {{"R_min_deg", rad_to_deg(parse_angle(s.R_min2, "R-min"))},
              {"R_max_deg", rad_to_deg(parse_angle(s.R_max2, "R-max"))}};
  } else {
    kind = ModelKind::Toy2Distance;
    params = {{"A0", s.A0}, {"L", s.Ldist}, {"r_min", s.r_min}, {"r_max", s.r_max}};
  }
  const auto model = model_from_params(kind, params);

  auto manifest = base_manifest("toy2", s);
  manifest.emplace_back("variant", s.variant);
  for (const auto& [k, v] : model_to_params(model)) manifest.emplace_back(k, io::format_rounded(v));
  manifest.emplace_back("ell_max", std::to_string(s.ell_max));

  const auto grid = linear_grid(0.0, pi, static_cast<std::size_t>(s.spec_theta_count));
  TabulatedCorrelation corr;
  corr.theta = grid;
  for (double t : grid) corr.values.push_back(model(t));
  TransformOptions opts;
  opts.threads = s.threads;
  const auto spec = legendre_coefficients(model, s.ell_max, opts);
  const auto report = analyze_peaks(band_power(spec), peak_options(s));

  const std::string base = "toy2_" + s.variant;
  fs::create_directories(s.out_dir);
  const fs::path corr_path = fs::path(s.out_dir) / (base + "_correlation.csv");
  const fs::path spec_path = fs::path(s.out_dir) / (base + "_spectrum.csv");
  {
    auto os = open_out(corr_path);
    io::write_correlation(os, corr, manifest);
  }
  {
    auto os = open_out(spec_path);
    io::write_spectrum(os, spec, manifest);
    os << "# verdict: " << verdict_line(report) << '\n';
  }
  write_gnuplot(s, corr_path, "theta [deg]", "C(theta)", "1:2", false);
  write_gnuplot(s, spec_path, "l", "C_l", "1:2", false);
  std::cout << "wrote " << corr_path.string() << "\nwrote " << spec_path.string() << '\n';
  std::cout << verdict_line(report) << '\n';
  return 0;
}

int cmd_analyze(const Settings& s) {
  const auto table = io::read_table_file(s.input);
  const auto raw = io::spectrum_from_table(table, s.input);
  const auto spec = analysis_weight(raw, s.weight);
  const auto report = analyze_peaks(spec, peak_options(s));
  auto manifest = base_manifest("analyze", s);
  manifest.emplace_back("input", s.input);
  manifest.emplace_back("weight", s.weight);
  manifest.emplace_back("smoothing", std::to_string(s.smoothing));
  manifest.emplace_back("prominence", fmt(s.prominence));
  manifest.emplace_back("regularity_threshold", fmt(s.regularity));
  const fs::path out = output_path(s, "peaks_" + stem(s.input) + ".csv");
  write_peak_report(report, out, manifest);
  std::cout << "wrote " << out.string() << '\n' << verdict_line(report) << '\n';
  return 0;
}

// Config entries become --key=value arguments placed right after the
// subcommand name, unless the same option was given on the command line.
std::vector<std::string> apply_config(const std::vector<std::string>& args, const Settings& first_pass,
                                      const Cli& cli) {
  const auto cfg = [&] {
    try {
      return io::read_config_file(first_pass.config);
    } catch (const angcorr::ParseError& e) {
      throw UsageError(std::string("config: ") + e.what());
    }
  }();
  const CLI::App* sub = nullptr;
  for (const auto* c : {cli.transform, cli.toy1, cli.toy2, cli.mc, cli.analyze}) {
    if (c->parsed()) sub = c;
  }
  std::vector<std::string> global_extra;
  std::vector<std::string> sub_extra;
  for (const auto& [key, value] : cfg) {
    if (key == "config") throw UsageError("config: nested config files are not supported");
    const std::string flag = "--" + key;
    const CLI::Option* opt = nullptr;
    bool global = false;
    if (sub) opt = sub->get_option_no_throw(flag);
    if (!opt) {
      opt = cli.app.get_option_no_throw(flag);
      global = opt != nullptr;
    }
    if (!opt) throw UsageError("config: unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    (global ? global_extra : sub_extra).push_back(flag + "=" + value);
  }
  std::vector<std::string> out;
  out.push_back(args.front());
  out.insert(out.end(), global_extra.begin(), global_extra.end());
  bool inserted = false;
  for (std::size_t i = 1; i < args.size(); ++i) {
    out.push_back(args[i]);
    if (!inserted && sub && args[i] == sub->get_name()) {
      out.insert(out.end(), sub_extra.begin(), sub_extra.end());
      inserted = true;
    }
  }
  return out;
}

int dispatch(const Cli& cli, const Settings& s) {
  if (cli.transform->parsed()) return cmd_transform(s);
  if (cli.toy1->parsed()) return cmd_toy1(s);
  if (cli.toy2->parsed()) return cmd_toy2(s);
  if (cli.mc->parsed()) return cmd_mc(s);
  if (cli.analyze->parsed()) return cmd_analyze(s);
  return 1;
}

int parse(Cli& cli, const std::vector<std::string>& args) {
  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    cli.app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = cli.app.exit(e);
    return code == 0 ? -1 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    Settings s;
    auto cli = std::make_unique<Cli>();
    build(*cli, s);
    if (const int rc = parse(*cli, args); rc != 0) return rc < 0 ? 0 : rc;
    if (!s.config.empty()) {
      const auto merged = apply_config(args, s, *cli);
      s = Settings{};
      cli = std::make_unique<Cli>();
      build(*cli, s);
      if (const int rc = parse(*cli, merged); rc != 0) return rc < 0 ? 0 : rc;
    }
    return dispatch(*cli, s);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const angcorr::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

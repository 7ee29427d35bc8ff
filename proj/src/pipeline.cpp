#include "rglue/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "rglue/io.hpp"

namespace rglue::pipeline {

namespace fs = std::filesystem;

EstimateResult estimate(const RFFrame& I1, const RFFrame& I2, const dp::DPParams& init,
                        const solver::SolverParams& params, int strain_window,
                        strain::Axis axis) {
  EstimateResult r;
  r.initial = dp::dp_displacement(I1, I2, init);
  r.refined = solver::rglue_refine(I1, I2, r.initial, params);
  if (axis == strain::Axis::axial) {
    r.strain = strain::axial_strain(r.refined.displacement, strain_window);
  } else {
    r.strain = strain::least_squares_strain(r.refined.displacement.lateral, strain_window,
                                            strain::Axis::lateral);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& where) {
  std::istringstream ss(text);
  T v{};
  ss >> v;
  if (!ss || !(ss >> std::ws).eof()) {
    throw ConfigError(where + ": cannot parse '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& where) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(where + ": expected a boolean, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& text, const std::string& where) {
  std::string t = text;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream ss(t);
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) out.push_back(parse_number<double>(tok, where));
  return out;
}

// "r0:r1,c0:c1"
metrics::Window parse_window(const std::string& text, const std::string& where) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw ConfigError(where + ": window must be 'r0:r1,c0:c1'");
  const auto rows = split(parts[0], ':');
  const auto cols = split(parts[1], ':');
  if (rows.size() != 2 || cols.size() != 2) {
    throw ConfigError(where + ": window must be 'r0:r1,c0:c1'");
  }
  metrics::Window w;
  w.row_start = parse_number<int>(rows[0], where);
  w.row_end = parse_number<int>(rows[1], where);
  w.col_start = parse_number<int>(cols[0], where);
  w.col_end = parse_number<int>(cols[1], where);
  return w;
}

std::vector<metrics::Window> parse_windows(const std::string& text, const std::string& where) {
  std::vector<metrics::Window> out;
  for (const auto& item : split(text, ';')) out.push_back(parse_window(item, where));
  return out;
}

// Reads keys of one section and rejects any that were not consumed.
class SectionReader {
 public:
  SectionReader(const KeyValueConfig& cfg, std::string section)
      : cfg_(cfg), section_(std::move(section)) {}
  ~SectionReader() = default;

  std::optional<std::string> str(const std::string& key) {
    used_.push_back(key);
    return cfg_.get(section_, key);
  }
  template <typename T>
  std::optional<T> num(const std::string& key) {
    auto s = str(key);
    if (!s) return std::nullopt;
    return parse_number<T>(*s, where(key));
  }
  template <typename T>
  void num_into(const std::string& key, T& target) {
    if (auto v = num<T>(key)) target = *v;
  }
  std::string where(const std::string& key) const { return "[" + section_ + "] " + key; }

  void finish() const {
    if (!cfg_.has_section(section_)) return;
    for (const auto& [key, value] : cfg_.sections().at(section_)) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        throw ConfigError("unknown key '" + key + "' in [" + section_ + "]");
      }
    }
  }

 private:
  const KeyValueConfig& cfg_;
  std::string section_;
  std::vector<std::string> used_;
};

phantom::PhantomSpec parse_phantom(const KeyValueConfig& cfg) {
  SectionReader r(cfg, "phantom");
  phantom::PhantomSpec spec;
  r.num_into("rows", spec.rows);
  r.num_into("cols", spec.cols);
  r.num_into("compression", spec.compression);
  r.num_into("scatterer_density", spec.scatterer_density);
  r.num_into("seed", spec.seed);
  r.num_into("peak_amplitude", spec.peak_amplitude);
  if (auto layers = r.str("layers")) {
    spec.layers.clear();
    for (const auto& item : split(*layers, ',')) {
      const auto kv = split(item, ':');
      if (kv.size() != 2) throw ConfigError(r.where("layers") + ": expected 'fraction:modulus'");
      spec.layers.push_back({parse_number<double>(kv[0], r.where("layers")),
                             parse_number<double>(kv[1], r.where("layers"))});
    }
  }
  double period = 5.5;
  double axial_sigma = 5.5 / 3.0;
  double lateral_sigma = 2.0;
  int upsample = 8;
  r.num_into("psf_period", period);
  r.num_into("psf_axial_sigma", axial_sigma);
  r.num_into("psf_lateral_sigma", lateral_sigma);
  r.num_into("axial_upsample", upsample);
  try {
    spec.psf = phantom::make_psf(period, axial_sigma, lateral_sigma, upsample);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[phantom] ") + e.what());
  }
  if (auto taps = r.str("psf_axial_taps")) spec.psf.axial_taps = parse_list(*taps, r.where("psf_axial_taps"));
  if (auto taps = r.str("psf_lateral_taps")) {
    spec.psf.lateral_taps = parse_list(*taps, r.where("psf_lateral_taps"));
  }
  r.finish();
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[phantom] ") + e.what());
  }
  return spec;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(10) << v;
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io::IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw io::IoError("write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io::IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string method_name(const solver::SolverParams& p) { return p.glue_mode ? "glue" : "rglue"; }

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      if (cfg.sections_.count(section)) {
        throw ConfigError("line " + std::to_string(lineno) + ": duplicate section [" + section + "]");
      }
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value' in a section");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    auto& sec = cfg.sections_[section];
    if (sec.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " + key);
    sec[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw io::IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool KeyValueConfig::has_section(const std::string& section) const {
  return sections_.count(section) != 0;
}

std::optional<std::string> KeyValueConfig::get(const std::string& section,
                                               const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

dp::DPParams InitConfig::resolve(const Grid& I1) const {
  dp::DPParams p = dp::DPParams::defaults_for(I1);
  if (axial_range) p.axial_range = *axial_range;
  if (lateral_range) p.lateral_range = *lateral_range;
  if (smoothness_weight) p.smoothness_weight = *smoothness_weight;
  p.validate();
  return p;
}

RunConfig RunConfig::parse(const std::string& text, const fs::path& base_dir) {
  const KeyValueConfig cfg = KeyValueConfig::parse(text);
  static const std::vector<std::string> known = {"phantom", "frames", "corruption", "init",
                                                 "solver",  "strain", "eval",       "output"};
  for (const auto& [name, body] : cfg.sections()) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ConfigError("unknown section [" + name + "]");
    }
  }

  RunConfig rc;
  rc.source_text = text;
  const bool has_phantom = cfg.has_section("phantom");
  const bool has_frames = cfg.has_section("frames");
  if (has_phantom == has_frames) {
    throw ConfigError("config needs exactly one of [phantom] or [frames]");
  }
  if (has_phantom) {
    rc.phantom = parse_phantom(cfg);
    rc.seed = rc.phantom->seed;
  } else {
    SectionReader r(cfg, "frames");
    auto pre = r.str("pre");
    auto post = r.str("post");
    r.finish();
    if (!pre || !post) throw ConfigError("[frames] needs 'pre' and 'post'");
    rc.frames = std::make_pair(resolve(base_dir, *pre), resolve(base_dir, *post));
    for (const auto& p : {rc.frames->first, rc.frames->second}) {
      if (!fs::exists(p)) throw ConfigError("frame file not found: " + p.string());
    }
  }

  {
    SectionReader r(cfg, "corruption");
    rc.corruption.psnr_db = r.num<double>("psnr_db");
    if (auto w = r.str("outlier_region")) {
      const auto win = parse_window(*w, r.where("outlier_region"));
      rc.corruption.outlier_region =
          phantom::OutlierRegion{win.row_start, win.row_end, win.col_start, win.col_end};
    }
    r.num_into("outlier_factor", rc.corruption.outlier_factor);
    if (auto lines = r.str("outlier_lines")) {
      for (double v : parse_list(*lines, r.where("outlier_lines"))) {
        rc.corruption.outlier_lines.push_back(static_cast<int>(v));
      }
    }
    r.num_into("line_fraction", rc.corruption.line_fraction);
    rc.corruption.noise_seed = r.num<std::uint64_t>("noise_seed");
    r.finish();
  }
  {
    SectionReader r(cfg, "init");
    rc.init.axial_range = r.num<int>("axial_range");
    rc.init.lateral_range = r.num<int>("lateral_range");
    rc.init.smoothness_weight = r.num<double>("smoothness_weight");
    r.finish();
  }
  {
    SectionReader r(cfg, "solver");
    auto& s = rc.solver;
    r.num_into("alpha1", s.alpha1);
    r.num_into("alpha2", s.alpha2);
    r.num_into("beta1", s.beta1);
    r.num_into("beta2", s.beta2);
    r.num_into("gamma", s.gamma);
    r.num_into("lambda", s.lambda);
    r.num_into("outer_iterations", s.outer_iterations);
    r.num_into("cg_tolerance", s.cg_tolerance);
    r.num_into("cg_max_iterations", s.cg_max_iterations);
    r.num_into("threads", s.threads);
    if (auto g = r.str("glue_mode")) s.glue_mode = parse_bool(*g, r.where("glue_mode"));
    if (auto m = r.str("method")) rc.set_method(*m);
    r.finish();
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("[solver] ") + e.what());
    }
  }
  {
    SectionReader r(cfg, "strain");
    r.num_into("window", rc.strain.window);
    if (auto a = r.str("axis")) {
      if (*a == "axial") {
        rc.strain.axis = strain::Axis::axial;
      } else if (*a == "lateral") {
        rc.strain.axis = strain::Axis::lateral;
      } else {
        throw ConfigError(r.where("axis") + ": expected axial or lateral");
      }
    }
    r.num_into("pgm_lo", rc.strain.pgm_lo);
    r.num_into("pgm_hi", rc.strain.pgm_hi);
    r.finish();
    if (rc.strain.window < 3 || rc.strain.window % 2 == 0) {
      throw ConfigError("[strain] window must be odd and >= 3");
    }
  }
  {
    SectionReader r(cfg, "eval");
    auto& e = rc.eval;
    if (auto t = r.str("truth")) e.truth = resolve(base_dir, *t);
    if (auto t = r.str("estimate")) e.estimate = resolve(base_dir, *t);
    if (auto w = r.str("background")) e.background = parse_window(*w, r.where("background"));
    if (auto w = r.str("target")) e.target = parse_window(*w, r.where("target"));
    if (auto w = r.str("targets")) e.targets = parse_windows(*w, r.where("targets"));
    if (auto w = r.str("backgrounds")) e.backgrounds = parse_windows(*w, r.where("backgrounds"));
    r.num_into("bins", e.bins);
    r.num_into("hist_lo", e.hist_lo);
    r.num_into("hist_hi", e.hist_hi);
    r.finish();
    if (e.truth && !fs::exists(*e.truth)) {
      throw ConfigError("truth file not found: " + e.truth->string());
    }
    if (e.targets.empty() != e.backgrounds.empty()) {
      throw ConfigError("[eval] targets and backgrounds must be given together");
    }
  }
  {
    SectionReader r(cfg, "output");
    if (auto d = r.str("dir")) rc.output_dir = resolve(base_dir, *d);
    r.finish();
  }
  return rc;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw io::IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.parent_path());
}

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  if (phantom) phantom->seed = s;
}

void RunConfig::set_method(const std::string& method) {
  dp_only = method == "dp";
  if (method == "glue") {
    solver.glue_mode = true;
  } else if (method == "rglue") {
    solver.glue_mode = false;
  } else if (!dp_only) {
    throw ConfigError("unknown method '" + method + "' (expected glue, rglue or dp)");
  }
}

Inputs prepare_inputs(const RunConfig& config) {
  std::optional<phantom::GroundTruth> truth;
  Grid pre;
  Grid post;
  if (config.phantom) {
    auto pair = phantom::synthesize_pair(*config.phantom);
    pre = std::move(pair.pre);
    post = std::move(pair.post);
    truth = std::move(pair.truth);
  } else {
    pre = io::read_frame(config.frames->first);
    post = io::read_frame(config.frames->second);
    require_same_shape(pre, post, "input frames");
  }
  RFFrame I1(std::move(pre));
  RFFrame I2(std::move(post));
  const auto& c = config.corruption;
  if (c.psnr_db) {
    const std::uint64_t s = c.noise_seed.value_or(config.seed);
    I1 = phantom::add_gaussian_noise(I1, *c.psnr_db, 2 * s + 1);
    I2 = phantom::add_gaussian_noise(I2, *c.psnr_db, 2 * s + 2);
  }
  if (c.outlier_region) I2 = phantom::inject_multiplicative_outlier(I2, *c.outlier_region, c.outlier_factor);
  if (!c.outlier_lines.empty()) {
    I2 = phantom::inject_additive_line_outliers(I2, c.outlier_lines, c.line_fraction);
  }
  return Inputs{std::move(I1), std::move(I2), std::move(truth)};
}

int cmd_synth(const RunConfig& config) {
  if (!config.phantom) throw ConfigError("synth needs a [phantom] section");
  const Inputs in = prepare_inputs(config);
  const fs::path& out = config.output_dir;
  ensure_dir(out);
  io::write_rff1(out / "pre.rff", in.pre);
  io::write_rff1(out / "post.rff", in.post);
  io::write_csv(out / "truth_axial_displacement.csv", in.truth->displacement.axial);
  io::write_csv(out / "truth_lateral_displacement.csv", in.truth->displacement.lateral);
  io::write_csv(out / "truth_strain.csv", in.truth->axial_strain);

  std::ostringstream m;
  m << "# rglue synth manifest\n";
  m << "seed = " << config.seed << "\n";
  m << "files = pre.rff post.rff truth_axial_displacement.csv truth_lateral_displacement.csv "
       "truth_strain.csv\n";
  m << "layer_strains =";
  for (double s : phantom::layer_strains(*config.phantom)) m << ' ' << fmt(s);
  m << "\n# config\n" << config.source_text;
  write_text(out / "manifest.txt", m.str());
  return kSuccess;
}

namespace {

std::string diagnostics_text(const solver::RefineResult& r, const std::string& method) {
  std::ostringstream d;
  d << "# method " << method << "\n";
  d << "iteration cost_before cost_after relative_residual cg_iterations converged mean_theta "
       "max_update\n";
  d << std::setprecision(12);
  for (const auto& it : r.diagnostics) {
    d << it.iteration << ' ' << it.cost_before << ' ' << it.cost_after << ' '
      << it.relative_residual << ' ' << it.cg_iterations << ' ' << (it.converged ? 1 : 0)
      << ' ' << it.mean_theta << ' ' << it.max_update << '\n';
  }
  return d.str();
}

}  // namespace

int cmd_estimate(const RunConfig& config) {
  const Inputs in = prepare_inputs(config);
  const dp::DPParams init = config.init.resolve(in.pre);
  const fs::path& out = config.output_dir;

  if (config.dp_only) {
    const DisplacementField d = dp::dp_displacement(in.pre, in.post, init);
    const StrainImage s = config.strain.axis == strain::Axis::axial
                              ? strain::axial_strain(d, config.strain.window)
                              : strain::least_squares_strain(d.lateral, config.strain.window,
                                                             strain::Axis::lateral);
    ensure_dir(out);
    io::write_csv(out / "dp_axial.csv", d.axial);
    io::write_csv(out / "dp_lateral.csv", d.lateral);
    io::write_csv(out / "displacement_axial.csv", d.axial);
    io::write_csv(out / "displacement_lateral.csv", d.lateral);
    io::write_csv(out / "strain.csv", s);
    io::write_pgm(out / "strain.pgm", s, config.strain.pgm_lo, config.strain.pgm_hi);
    write_text(out / "diagnostics.txt", "# method dp\n");
    if (in.truth) io::write_csv(out / "truth_strain.csv", in.truth->axial_strain);
    return kSuccess;
  }
  const EstimateResult r =
      estimate(in.pre, in.post, init, config.solver, config.strain.window, config.strain.axis);

  ensure_dir(out);
  io::write_csv(out / "dp_axial.csv", r.initial.axial);
  io::write_csv(out / "dp_lateral.csv", r.initial.lateral);
  io::write_csv(out / "displacement_axial.csv", r.refined.displacement.axial);
  io::write_csv(out / "displacement_lateral.csv", r.refined.displacement.lateral);
  io::write_csv(out / "strain.csv", r.strain);
  io::write_pgm(out / "strain.pgm", r.strain, config.strain.pgm_lo, config.strain.pgm_hi);
  io::write_csv(out / "theta.csv", r.refined.weights.theta());
  io::write_pgm(out / "theta.pgm", r.refined.weights.theta(), 0.0, 1.0);
  write_text(out / "diagnostics.txt", diagnostics_text(r.refined, method_name(config.solver)));
  if (in.truth) io::write_csv(out / "truth_strain.csv", in.truth->axial_strain);

  if (!r.refined.converged()) {
    std::cerr << "warning: conjugate gradient did not reach tolerance "
              << config.solver.cg_tolerance << "; outputs written, see diagnostics.txt\n";
    return kNonConvergence;
  }
  return kSuccess;
}

namespace {

struct EvalReport {
  std::string text;
  double rmse = 0.0;
  std::optional<double> snr;
  std::optional<double> cnr;
  std::optional<double> cnr_mean;
};

Grid truth_for(const RunConfig& config) {
  if (config.eval.truth) return io::read_csv(*config.eval.truth);
  if (config.phantom) {
    if (config.strain.axis == strain::Axis::lateral) {
      return Grid(config.phantom->rows, config.phantom->cols, 0.0);
    }
    return phantom::ground_truth_displacement(*config.phantom).axial_strain;
  }
  const fs::path stored = config.output_dir / "truth_strain.csv";
  if (fs::exists(stored)) return io::read_csv(stored);
  throw ConfigError("eval needs [eval] truth or a [phantom] section");
}

EvalReport evaluate(const RunConfig& config, const fs::path& out_dir) {
  const fs::path est_path = config.eval.estimate.value_or(out_dir / "strain.csv");
  const Grid est = io::read_csv(est_path);
  const Grid truth = truth_for(config);
  require_same_shape(est, truth, "eval: estimate vs truth");

  EvalReport rep;
  std::ostringstream t;
  t << std::setprecision(12);
  rep.rmse = metrics::rmse(est, truth);
  t << "name=rmse value=" << rep.rmse << " window=0:" << est.rows() - 1 << ",0:"
    << est.cols() - 1 << '\n';
  const auto& e = config.eval;
  if (e.background) {
    try {
      rep.snr = metrics::snr(est, *e.background);
      t << "name=snr value=" << *rep.snr << " window=" << e.background->str() << '\n';
    } catch (const metrics::UndefinedMetric&) {
      t << "name=snr value=undefined window=" << e.background->str() << '\n';
    }
  }
  if (e.background && e.target) {
    try {
      rep.cnr = metrics::cnr(est, *e.target, *e.background);
      t << "name=cnr value=" << *rep.cnr << " target=" << e.target->str()
        << " background=" << e.background->str() << '\n';
    } catch (const metrics::UndefinedMetric&) {
      t << "name=cnr value=undefined target=" << e.target->str()
        << " background=" << e.background->str() << '\n';
    }
  }
  if (!e.targets.empty()) {
    const auto h = metrics::cnr_histogram(est, e.targets, e.backgrounds, e.bins, e.hist_lo, e.hist_hi);
    std::ostringstream values;
    values << "target,background,target_window,background_window,cnr\n" << std::setprecision(12);
    for (std::size_t k = 0; k < h.values.size(); ++k) {
      const auto& tw = e.targets[static_cast<std::size_t>(h.target_of[k])];
      const auto& bw = e.backgrounds[static_cast<std::size_t>(h.background_of[k])];
      values << h.target_of[k] << ',' << h.background_of[k] << ",\"" << tw.str() << "\",\""
             << bw.str() << "\"," << h.values[k] << '\n';
    }
    write_text(out_dir / "cnr_values.csv", values.str());
    std::ostringstream hist;
    hist << "bin_lo,bin_hi,count\n" << std::setprecision(12);
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
      hist << h.edges[k] << ',' << h.edges[k + 1] << ',' << h.counts[k] << '\n';
    }
    write_text(out_dir / "cnr_histogram.csv", hist.str());
    if (h.mean_defined()) {
      rep.cnr_mean = h.mean;
      t << "name=cnr_mean value=" << h.mean;
    } else {
      t << "name=cnr_mean value=undefined";
    }
    t << " pairs=" << h.values.size() << " excluded=" << h.excluded << '\n';
  }
  rep.text = t.str();
  return rep;
}

}  // namespace

int cmd_eval(const RunConfig& config) {
  ensure_dir(config.output_dir);
  const EvalReport rep = evaluate(config, config.output_dir);
  write_text(config.output_dir / "metrics.txt", rep.text);
  std::cout << rep.text;
  return kSuccess;
}

int cmd_compare(const RunConfig& config) {
  int worst = kSuccess;
  std::map<std::string, EvalReport> reports;
  for (const std::string method : {"glue", "rglue"}) {
    RunConfig c = config;
    c.set_method(method);
    c.output_dir = config.output_dir / method;
    c.eval.estimate.reset();
    const int code = cmd_estimate(c);
    if (code != kSuccess) worst = code;
    EvalReport rep = evaluate(c, c.output_dir);
    write_text(c.output_dir / "metrics.txt", rep.text);
    reports[method] = std::move(rep);
  }
  const auto line = [](const std::string& name, const std::optional<double>& g,
                       const std::optional<double>& r) {
    std::ostringstream s;
    s << std::setprecision(8) << std::left << std::setw(10) << name;
    const auto show = [&s](const std::optional<double>& v) {
      if (v) s << std::setw(16) << *v; else s << std::setw(16) << "-";
    };
    show(g);
    show(r);
    if (g && r) s << (*r - *g); else s << "-";
    s << '\n';
    return s.str();
  };
  const auto& g = reports["glue"];
  const auto& r = reports["rglue"];
  std::ostringstream t;
  t << std::left << std::setw(10) << "metric" << std::setw(16) << "glue" << std::setw(16)
    << "rglue" << "rglue-glue\n";
  t << line("rmse", g.rmse, r.rmse);
  t << line("snr", g.snr, r.snr);
  t << line("cnr", g.cnr, r.cnr);
  t << line("cnr_mean", g.cnr_mean, r.cnr_mean);
  ensure_dir(config.output_dir);
  write_text(config.output_dir / "compare.txt", t.str());
  std::cout << t.str();
  return worst;
}

int guarded(const std::string& what, int (*fn)(const RunConfig&), const RunConfig& config) {
  try {
    return fn(config);
  } catch (const ConfigError& e) {
    std::cerr << what << ": config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const io::IoError& e) {
    std::cerr << what << ": I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << what << ": " << e.what() << '\n';
    return kHardFailure;
  }
}

}  // namespace rglue::pipeline

#pragma once

// Configuration-driven pipelines behind the command-line tool. Every
// command reads its keys from a strict INI config, writes CSV/PGM artifacts
// plus a manifest.json into the output directory, and reports violations of
// the invariant it asserts through the process exit code:
//   0  all asserted invariants hold
//   1  violations found (recorded in the CSV and the manifest)
//   2  configuration or runtime error
// Identical config + seed + threads always produce byte-identical artifacts;
// the manifest's wall_clock_seconds field is the single timing exception.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shortck/basin.hpp"
#include "shortck/boundary.hpp"
#include "shortck/config.hpp"
#include "shortck/io.hpp"
#include "shortck/potentials.hpp"
#include "shortck/raster.hpp"
#include "shortck/theorems.hpp"

namespace shortck {

constexpr const char* kToolName = "shortck";
constexpr const char* kToolVersion = "0.1.0";

// Command-line overrides; when set they replace the config-file values and
// are echoed back into the manifest as the resolved configuration.
struct RunOverrides {
  std::optional<uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> threads;
};

struct RunArtifacts {
  int exit_code = 0;
  std::string command;
  std::string out_dir;
  std::map<std::string, std::string> output_digests;
  long long violations = 0;
};

namespace detail_run {

struct RunContext {
  ConfigReader reader;
  std::string command;
  uint64_t seed = 0;
  std::string out_dir;
  std::string threads_setting = "auto";
  int threads = 1;
  long long violations = 0;
  nlohmann::json results = nlohmann::json::object();
  std::map<std::string, std::string> outputs;
  std::ostream* log = nullptr;

  explicit RunContext(ConfigReader r) : reader(std::move(r)) {}

  void emit(const std::string& name, const std::string& bytes) {
    std::filesystem::path p = std::filesystem::path(out_dir) / name;
    write_text_file(p.string(), bytes);
    outputs[name] = digest_hex(bytes);
  }

  void logline(const std::string& s) {
    if (log) *log << s << "\n";
  }
};

inline MapSequence parse_sequence(ConfigReader& r, int cap_default = 60) {
  std::string kind = r.get_string("sequence", "kind", "power_tower");
  int k = static_cast<int>(r.get_int("sequence", "k", 3));
  int d = static_cast<int>(r.get_int("sequence", "d", 2));
  int cap = static_cast<int>(r.get_int("sequence", "cap", cap_default));
  if (kind == "power_tower")
    return MapSequence(EtaSchedule{k, d, PowerTower{r.require_double("sequence", "a")}}, cap);
  if (kind == "shifted_tower")
    return MapSequence(EtaSchedule{k, d, ShiftedTower{r.require_double("sequence", "a")}}, cap);
  if (kind == "custom") {
    CustomEtas c;
    for (double v : r.require_double_list("sequence", "etas"))
      c.etas.push_back(LogScalar::from_real(v));
    return MapSequence(EtaSchedule{k, d, c}, cap);
  }
  if (kind == "autonomous_eta") {
    double eta = r.require_double("sequence", "eta");
    return MapSequence(Autonomous{make_eta_step(k, d, std::complex<double>(eta, 0.0))}, cap);
  }
  if (kind == "shift_like") {
    int nu = static_cast<int>(r.get_int("sequence", "nu", 2));
    double delta = r.get_double("sequence", "delta", 1.0);
    return MapSequence(Autonomous{make_shift_like(k, nu, d, {delta, 0.0})}, cap);
  }
  throw ConfigError("unknown sequence kind '" + kind + "'");
}

inline ShiftLike parse_shift_like(ConfigReader& r) {
  std::string kind = r.get_string("sequence", "kind", "shift_like");
  if (kind != "shift_like")
    throw ConfigError("this command needs [sequence] kind = shift_like");
  int k = static_cast<int>(r.get_int("sequence", "k", 3));
  int d = static_cast<int>(r.get_int("sequence", "d", 2));
  int nu = static_cast<int>(r.get_int("sequence", "nu", 2));
  double delta = r.get_double("sequence", "delta", 1.0);
  return make_shift_like(k, nu, d, {delta, 0.0});
}

inline std::vector<std::string> coordinate_header(int k, const std::string& prefix) {
  std::vector<std::string> h;
  for (int i = 1; i <= k; ++i) {
    h.push_back(strprintf("%s%d_re", prefix.c_str(), i));
    h.push_back(strprintf("%s%d_im", prefix.c_str(), i));
  }
  return h;
}

inline void append_coordinates(std::vector<std::string>& row, const Cvec& z) {
  for (int i = 0; i < z.k; ++i) {
    row.push_back(csv_cell(z[i].real()));
    row.push_back(csv_cell(z[i].imag()));
  }
}

// --------------------------------------------------------------------------
// basin: classify a complex 2-plane slice and render it as a PGM raster,
// optionally with the potential written per attracted pixel.
// --------------------------------------------------------------------------
inline void cmd_basin(RunContext& ctx) {
  ConfigReader& r = ctx.reader;
  MapSequence s = parse_sequence(r);
  int k = s.dim();

  int width = static_cast<int>(r.get_int("grid", "width", 200));
  int height = static_cast<int>(r.get_int("grid", "height", 200));
  int axis_u = static_cast<int>(r.get_int("grid", "axis_u", 1));
  int axis_v = static_cast<int>(r.get_int("grid", "axis_v", 2));
  double u_min = r.get_double("grid", "u_min", -1.5);
  double u_max = r.get_double("grid", "u_max", 1.5);
  double v_min = r.get_double("grid", "v_min", -1.5);
  double v_max = r.get_double("grid", "v_max", 1.5);
  std::vector<double> base_parts =
      r.get_double_list("grid", "base", std::vector<double>(2 * static_cast<size_t>(k), 0.0));

  double radius = r.get_double("params", "radius", default_escape_radius(s));
  double capture = r.get_double("params", "capture", 0.5);
  int max_iter = static_cast<int>(r.get_int("params", "max_iter", 200));
  double margin = r.get_double("params", "margin", 1e-3);
  bool with_psi = r.get_bool("params", "psi", true);
  r.finish();

  if (axis_u < 1 || axis_u > k || axis_v < 1 || axis_v > k || axis_u == axis_v)
    throw ConfigError("grid axes must be distinct coordinates in 1..k");
  if (base_parts.size() != 2 * static_cast<size_t>(k))
    throw ConfigError("grid base needs 2k entries (re, im per coordinate)");

  Cvec base(k);
  for (int i = 0; i < k; ++i) base[i] = {base_parts[2 * i], base_parts[2 * i + 1]};
  Cvec du(k), dv(k);
  du[axis_u - 1] = 1.0;
  dv[axis_v - 1] = 1.0;
  GridSpec g(base, du, dv, width, height, u_min, u_max, v_min, v_max);
  ClassifyParams p(radius, capture, max_iter, margin);

  Raster raster = render_slice(s, g, p, with_psi, ctx.threads);
  ctx.emit("basin.pgm", pgm_bytes(raster));

  long long attracted = 0, escaped = 0, undecided = 0;
  for (const OrbitClass& c : raster.classes) {
    if (c.kind == OrbitKind::Attracted) ++attracted;
    if (c.kind == OrbitKind::Escaped) ++escaped;
    if (c.kind == OrbitKind::Undecided) ++undecided;
  }

  if (with_psi) {
    CsvTable t({"u", "v", "psi", "depth", "converged"});
    for (int row = 0; row < height; ++row)
      for (int col = 0; col < width; ++col) {
        double u = u_min + (u_max - u_min) * col / double(width - 1);
        double v = v_min + (v_max - v_min) * row / double(height - 1);
        size_t idx = static_cast<size_t>(row) * width + col;
        const std::optional<double>& psi = raster.psi[idx];
        t.add_row({csv_cell(u), csv_cell(v), psi ? csv_cell(*psi) : std::string(),
                   csv_cell(raster.classes[idx].step), csv_cell(psi.has_value())});
      }
    ctx.emit("basin_psi.csv", t.to_bytes());
  }

  ctx.results["attracted"] = attracted;
  ctx.results["escaped"] = escaped;
  ctx.results["undecided"] = undecided;
  ctx.results["decided_fraction"] = decided_fraction(raster);
  ctx.logline(strprintf("basin: %lldx%lld grid, %lld attracted / %lld escaped / %lld undecided",
                        (long long)width, (long long)height, attracted, escaped, undecided));
}

// --------------------------------------------------------------------------
// potential: limit potential at random sample points, with the envelope
// monotonicity invariant checked at every depth.
// --------------------------------------------------------------------------
inline void cmd_potential(RunContext& ctx) {
  ConfigReader& r = ctx.reader;
  MapSequence s = parse_sequence(r);
  int k = s.dim();
  int samples = static_cast<int>(r.get_int("params", "samples", 1000));
  double box = r.get_double("params", "box", 1.0);
  double tol = r.get_double("params", "tol", 1e-9);
  int depth = static_cast<int>(r.get_int("params", "depth", 40));
  int envelope_levels = static_cast<int>(r.get_int("params", "envelope_levels", 30));
  r.finish();

  std::vector<std::string> header = {"index"};
  for (const std::string& h : coordinate_header(k, "z")) header.push_back(h);
  header.insert(header.end(), {"psi", "depth", "converged", "envelope", "monotone_violations"});
  CsvTable t(header);

  long long converged = 0;
  for (int i = 0; i < samples; ++i) {
    Rng rng = Rng::for_sample(ctx.seed, static_cast<uint64_t>(i));
    Cvec z(k);
    for (int c = 0; c < k; ++c) z[c] = rng.disc(box);
    PotentialEstimate est = psi_limit(s, z, tol, depth);
    if (est.converged) ++converged;

    int bad = 0;
    double prev = std::numeric_limits<double>::infinity();
    double env = 0.0;
    for (int n = 0; n <= envelope_levels; ++n) {
      env = psi_envelope(s, z, n);
      if (env > prev + 1e-12) ++bad;
      prev = env;
    }
    ctx.violations += bad;

    std::vector<std::string> row = {csv_cell(i)};
    append_coordinates(row, z);
    row.insert(row.end(), {csv_cell(est.value), csv_cell(est.depth_used),
                           csv_cell(est.converged), csv_cell(env), csv_cell(bad)});
    t.add_row(std::move(row));
  }
  ctx.emit("potential.csv", t.to_bytes());
  ctx.results["samples"] = samples;
  ctx.results["converged"] = converged;
  ctx.results["envelope_violations"] = ctx.violations;
  ctx.logline(strprintf("potential: %d samples, %lld converged, %lld envelope violations",
                        samples, converged, ctx.violations));
}

// --------------------------------------------------------------------------
// green: escape-rate lower bound on the plus cone of a shift-like map.
// --------------------------------------------------------------------------
inline void cmd_green(RunContext& ctx) {
  ConfigReader& r = ctx.reader;
  ShiftLike sl = parse_shift_like(r);
  double radius = r.get_double("params", "radius", 4.0);
  int block = static_cast<int>(r.get_int("params", "block", sl.nu));
  int n_hi = static_cast<int>(r.get_int("params", "n_hi", 5));
  int samples = static_cast<int>(r.get_int("params", "samples", 1000));
  r.finish();

  GrowthReport rep = green_growth_check(sl, radius, block, n_hi, samples, ctx.seed);
  ctx.violations = rep.violations;

  CsvTable t({"samples", "violations", "block", "worst_margin"});
  t.add_row({csv_cell(rep.samples), csv_cell(rep.violations), csv_cell(rep.block),
             csv_cell(rep.worst_margin)});
  ctx.emit("green.csv", t.to_bytes());
  ctx.results["block"] = rep.block;
  ctx.results["worst_margin"] = rep.worst_margin;
  ctx.logline(strprintf("green: block %d, %d samples, %d violations", rep.block, rep.samples,
                        rep.violations));
}

// --------------------------------------------------------------------------
// filtration: forward invariance of the plus region along the sequence.
// --------------------------------------------------------------------------
inline void cmd_filtration(RunContext& ctx) {
  ConfigReader& r = ctx.reader;
  MapSequence s = parse_sequence(r);
  int k = s.dim();
  double radius = r.get_double("params", "radius", default_escape_radius(s));
  int samples = static_cast<int>(r.get_int("params", "samples", 10000));
  int steps = static_cast<int>(r.get_int("params", "steps", 20));
  r.finish();

  FiltrationSpec f = s.default_filtration(radius);
  std::vector<int> plus_axes;
  for (int i = 1; i <= k; ++i)
    if (f.is_plus_axis(i)) plus_axes.push_back(i);

  CsvTable t({"sample", "step", "region", "dominant_axis"});
  long long checked = 0;
  for (int i = 0; i < samples; ++i) {
    Rng rng = Rng::for_sample(ctx.seed, static_cast<uint64_t>(i));
    int axis = plus_axes[static_cast<size_t>(rng.below(static_cast<int>(plus_axes.size())))];
    double lead = radius * (1.0 + 1.5 * rng.uniform());
    Cvec z(k);
    z[axis - 1] = lead * rng.unit_circle();
    for (int c = 0; c < k; ++c)
      if (c != axis - 1) z[c] = rng.disc(0.95 * lead);

    LogVec state = to_log(z);
    for (int n = 0; n <= steps; ++n) {
      RegionTag tag = classify_filtration(state, f);
      ++checked;
      if (tag.region != Region::Plus) {
        ++ctx.violations;
        const char* name = tag.region == Region::Interior ? "interior" : "minus";
        t.add_row({csv_cell(i), csv_cell(n), name, csv_cell(tag.dominant_axis)});
        break;
      }
      if (n < steps) s.apply_step(state, n);
    }
  }
  ctx.emit("filtration.csv", t.to_bytes());
  ctx.results["samples"] = samples;
  ctx.results["steps"] = steps;
  ctx.results["iterates_checked"] = checked;
  ctx.logline(strprintf("filtration: %d cone samples, %d steps, %lld violations", samples, steps,
                        ctx.violations));
}

// --------------------------------------------------------------------------
// region-test: uniform eigenvalue-ratio bound over a composition schedule.
// --------------------------------------------------------------------------
inline void cmd_region_test(RunContext& ctx) {
  ConfigReader& r = ctx.reader;
  double alpha = r.require_double("params", "alpha");
  double beta = r.require_double("params", "beta");
  double exponent = r.require_double("params", "r");
  int bound = static_cast<int>(r.get_int("params", "bound", 4));
  bool swap_conj = r.get_bool("params", "swap_conjugated", false);
  std::vector<long long> p_raw = r.require_int_list("params", "p");
  std::vector<long long> q_raw = r.require_int_list("params", "q");
  r.finish();

  std::vector<int> p(p_raw.begin(), p_raw.end());
  std::vector<int> q(q_raw.begin(), q_raw.end());
  RegionTestResult res = region_test(p, q, {alpha, 0.0}, {beta, 0.0}, exponent, bound, swap_conj);

  CsvTable t({"index", "p", "q", "branch", "lhs_log"});
  for (const CaseRecord& c : res.case_trace)
    t.add_row({csv_cell(c.sched_index), csv_cell(c.p), csv_cell(c.q), csv_cell(c.branch),
               csv_cell(c.lhs_log)});
  ctx.emit("region.csv", t.to_bytes());

  if (res.xi)
    ctx.results["xi"] = *res.xi;
  else
    ctx.results["xi"] = nullptr;
  ctx.results["worst_k"] = res.worst_k;
  ctx.results["fast_path"] = res.autonomous_fast_path;
  ctx.results["note"] = res.note;
  if (!res.xi && !res.autonomous_fast_path) ctx.violations = 1;
  ctx.logline("region-test: " + (res.xi ? strprintf("xi = %.6f", *res.xi) : res.note));
}

// --------------------------------------------------------------------------
// prop12: orbit boundedness along random or explicit F/G schedules, via the
// backward shadow construction.
// --------------------------------------------------------------------------
inline void cmd_prop12(RunContext& ctx) {
  ConfigReader& r = ctx.reader;
  double alpha = r.get_double("params", "alpha", 0.5);
  double beta = r.get_double("params", "beta", 0.2);
  int kdeg = static_cast<int>(r.get_int("params", "kdeg", 3));
  int steps = static_cast<int>(r.get_int("params", "steps", 10000));
  int buffer = static_cast<int>(r.get_int("params", "buffer", 60));
  int schedules = static_cast<int>(r.get_int("params", "schedules", 10));
  std::string choices;
  bool explicit_word = r.has("params", "choices");
  if (explicit_word) choices = r.require_string("params", "choices");
  r.finish();

  double bound = prop12_analytic_bound({alpha, 0.0}, {beta, 0.0}, kdeg, {0.0, 0.0});
  std::vector<std::string> words;
  if (explicit_word) {
    words.push_back(choices);
  } else {
    for (int w = 0; w < schedules; ++w) {
      Rng rng = Rng::for_sample(ctx.seed, static_cast<uint64_t>(w));
      std::string word;
      for (int i = 0; i < steps + buffer; ++i) word.push_back(rng.below(2) == 0 ? 'F' : 'G');
      words.push_back(std::move(word));
    }
  }

  CsvTable t({"schedule", "z0_re", "z0_im", "orbit_bound", "recursion_residual", "ok"});
  double worst_bound = 0.0, worst_residual = 0.0;
  for (size_t w = 0; w < words.size(); ++w) {
    AffineOrbitResult res =
        prop12_shadow_orbit(words[w], {alpha, 0.0}, {beta, 0.0}, kdeg, {0.0, 0.0}, buffer, steps);
    bool ok = res.orbit_bound <= 2.0 * bound + 1e-12 && res.recursion_residual < 1e-9;
    if (!ok) ++ctx.violations;
    worst_bound = std::max(worst_bound, res.orbit_bound);
    worst_residual = std::max(worst_residual, res.recursion_residual);
    t.add_row({csv_cell(static_cast<int>(w)), csv_cell(res.z0.real()), csv_cell(res.z0.imag()),
               csv_cell(res.orbit_bound), csv_cell(res.recursion_residual), csv_cell(ok)});
  }
  ctx.emit("prop12.csv", t.to_bytes());
  ctx.results["analytic_bound"] = bound;
  ctx.results["worst_orbit_bound"] = worst_bound;
  ctx.results["worst_residual"] = worst_residual;
  ctx.results["schedules"] = static_cast<long long>(words.size());
  ctx.logline(strprintf("prop12: %zu schedules, worst bound %.6f vs limit %.6f, %lld violations",
                        words.size(), worst_bound, 2.0 * bound, ctx.violations));
}

// --------------------------------------------------------------------------
// disjoint: pairwise-disjoint basin copies along translated axes.
// --------------------------------------------------------------------------
inline void cmd_disjoint(RunContext& ctx) {
  ConfigReader& r = ctx.reader;
  MapSequence s = parse_sequence(r);
  double radius = r.get_double("params", "radius", 1.4);
  long long samples = r.get_int("params", "samples", 100000);
  r.finish();

  DisjointReport rep = disjoint_shorts(s, radius, samples, ctx.seed);
  ctx.violations = rep.double_memberships + rep.case_violations;

  CsvTable t({"domain", "members"});
  for (size_t i = 0; i < rep.member_counts.size(); ++i)
    t.add_row({csv_cell(static_cast<int>(i) + 1), csv_cell(rep.member_counts[i])});
  ctx.emit("disjoint.csv", t.to_bytes());

  double undecided_fraction =
      static_cast<double>(rep.undecided) / (static_cast<double>(rep.samples) * rep.domains);
  ctx.results["domains"] = rep.domains;
  ctx.results["samples"] = rep.samples;
  ctx.results["double_memberships"] = rep.double_memberships;
  ctx.results["undecided_fraction"] = undecided_fraction;
  ctx.results["case1"] = rep.case1;
  ctx.results["case2"] = rep.case2;
  ctx.results["case_violations"] = rep.case_violations;
  ctx.logline(strprintf("disjoint: %d domains, %lld samples, %lld double memberships",
                        rep.domains, rep.samples, rep.double_memberships));
}

// --------------------------------------------------------------------------
// avoid-variety: the translated avoidance sets map into the plus region,
// and basin members never meet the translated image.
// --------------------------------------------------------------------------
inline void cmd_avoid_variety(RunContext& ctx) {
  ConfigReader& r = ctx.reader;
  int k = static_cast<int>(r.get_int("params", "k", 3));
  double radius = r.get_double("params", "radius", 2.0);
  double eps = r.get_double("params", "eps", 0.5 / radius);
  int samples = static_cast<int>(r.get_int("params", "samples", 10000));
  int trials = static_cast<int>(r.get_int("params", "normalizer_trials", 50));
  int probes = static_cast<int>(r.get_int("params", "normalizer_probes", 100));
  int basin_samples = static_cast<int>(r.get_int("params", "basin_samples", 0));
  std::optional<MapSequence> s;
  if (basin_samples > 0) s = parse_sequence(r);
  r.finish();

  VarietySets vs(k, eps, radius);
  Mat normalizer = find_variety_normalizer(vs, trials, probes, ctx.seed);
  bool identity_normalizer = true;
  for (int i = 0; i < k && identity_normalizer; ++i)
    for (int j = 0; j < k; ++j)
      if (normalizer.at(i, j) != (i == j ? std::complex<double>(1.0) : std::complex<double>(0.0))) {
        identity_normalizer = false;
        break;
      }

  auto sampler = [&vs](Rng& rng, uint64_t index) { return default_variety_sample(vs, rng, index); };
  FiltrationSpec f = FiltrationSpec::eta_default(k, radius);
  AvoidanceReport rep = variety_avoidance_check(vs, sampler, f, samples, ctx.seed);
  ctx.violations = rep.violations;

  int basin_hits = 0, basin_members = 0;
  if (s) {
    ClassifyParams p(default_escape_radius(*s), 0.5, 200);
    uint64_t attempt = 0;
    const uint64_t budget = 1000000;
    while (basin_members < basin_samples && attempt < budget) {
      Rng rng = Rng::for_sample(ctx.seed ^ 0xba51fULL, attempt++);
      Cvec z(k);
      for (int c = 0; c < k; ++c) z[c] = rng.disc(1.5);
      if (classify_point(*s, z, p).kind != OrbitKind::Attracted) continue;
      ++basin_members;
      if (in_shifted_tube(vs, z)) ++basin_hits;
    }
    ctx.violations += basin_hits;
  }

  CsvTable t({"samples", "violations", "tube_samples", "cone_samples", "basin_members",
              "basin_hits"});
  t.add_row({csv_cell(rep.samples), csv_cell(rep.violations), csv_cell(rep.case1),
             csv_cell(rep.case2), csv_cell(basin_members), csv_cell(basin_hits)});
  ctx.emit("avoid.csv", t.to_bytes());
  ctx.results["identity_normalizer"] = identity_normalizer;
  ctx.results["image_violations"] = rep.violations;
  ctx.results["basin_members"] = basin_members;
  ctx.results["basin_hits"] = basin_hits;
  ctx.logline(strprintf("avoid-variety: %d samples, %d image violations, %d/%d basin hits",
                        rep.samples, rep.violations, basin_hits, basin_members));
}

// --------------------------------------------------------------------------
// fb-inclusion: the scaled autonomous basin sits inside the sub-level set
// of the shifted-tower potential.
// --------------------------------------------------------------------------
inline void cmd_fb_inclusion(RunContext& ctx) {
  ConfigReader& r = ctx.reader;
  double a = r.get_double("params", "a", 0.5);
  int k = static_cast<int>(r.get_int("params", "k", 3));
  int samples = static_cast<int>(r.get_int("params", "samples", 1000));
  double tol = r.get_double("params", "tol", 1e-6);
  r.finish();

  InclusionReport rep = fb_inside_short(a, k, samples, ctx.seed, tol);
  ctx.violations = rep.violations;

  CsvTable t({"members", "violations", "unconverged", "worst_gap"});
  t.add_row({csv_cell(rep.members), csv_cell(rep.violations), csv_cell(rep.unconverged),
             csv_cell(rep.worst_gap)});
  ctx.emit("fb.csv", t.to_bytes());
  ctx.results["members"] = rep.members;
  ctx.results["unconverged"] = rep.unconverged;
  ctx.results["worst_gap"] = rep.worst_gap;
  ctx.logline(strprintf("fb-inclusion: %d members, %d violations, worst gap %.3g", rep.members,
                        rep.violations, rep.worst_gap));
}

// --------------------------------------------------------------------------
// eta-check: coefficient decay stays below the doubly exponential tower.
// --------------------------------------------------------------------------
inline void cmd_eta_check(RunContext& ctx) {
  ConfigReader& r = ctx.reader;
  MapSequence s = parse_sequence(r);
  double growth = r.get_double("params", "growth_constant", 2.0);
  int n_hi = static_cast<int>(r.get_int("params", "n_hi", 40));
  r.finish();

  const EtaSchedule* sched = std::get_if<EtaSchedule>(&s.gen);
  if (!sched) throw ConfigError("eta-check needs a coefficient-schedule sequence");
  EtaGrowthReport rep = eta_growth_check(growth, *sched, n_hi);
  ctx.violations = rep.violations;

  CsvTable t({"violating_index"});
  for (int i : rep.indices) t.add_row({csv_cell(i)});
  ctx.emit("eta.csv", t.to_bytes());
  ctx.results["n_hi"] = n_hi;
  ctx.logline(strprintf("eta-check: depths 0..%d, %d violations", n_hi, rep.violations));
}

// --------------------------------------------------------------------------
// boundary: radial graph of one stage over one polydisc face.
// --------------------------------------------------------------------------
inline void cmd_boundary(RunContext& ctx) {
  ConfigReader& r = ctx.reader;
  MapSequence s = parse_sequence(r);
  int k = s.dim();
  int stage = static_cast<int>(r.get_int("params", "stage", 1));
  int face = static_cast<int>(r.get_int("params", "face", 2));
  double face_radius = r.get_double("params", "face_radius", 5.0);
  int angular = static_cast<int>(r.get_int("params", "angular", 16));
  PullbackOptions opts;
  opts.t_max = r.get_double("params", "t_max", 2.0);
  opts.scan_samples = static_cast<int>(r.get_int("params", "scan_samples", 64));
  opts.residual_tol = r.get_double("params", "residual_tol", 1e-10);
  r.finish();

  FaceGrid grid = make_face_grid(face, k, face_radius, angular);
  GraphFunction g = graph_pullback(s, stage, grid, opts);

  std::vector<std::string> header = {"face", "phase", "transverse"};
  for (const std::string& h : coordinate_header(k, "z")) header.push_back(h);
  header.insert(header.end(), {"radius", "residual"});
  CsvTable t(header);
  for (int a = 0; a < grid.angular_samples; ++a)
    for (int m = 0; m < static_cast<int>(grid.transverse.size()); ++m) {
      double radius = g.at(a, m);
      std::vector<std::string> row = {csv_cell(face), csv_cell(a), csv_cell(m)};
      append_coordinates(row, grid.point(a, m, radius));
      row.push_back(csv_cell(radius));
      row.push_back(csv_cell(face_level_residual(s, stage, grid, a, m, radius)));
      t.add_row(std::move(row));
    }
  ctx.emit("boundary.csv", t.to_bytes());
  ctx.results["nodes"] = grid.nodes();
  ctx.results["continuity_modulus"] = g.continuity_modulus;
  ctx.logline(strprintf("boundary: stage %d face %d, %d nodes, continuity %.3g", stage, face,
                        grid.nodes(), g.continuity_modulus));
}

// --------------------------------------------------------------------------
// stagewise: the inductive smooth-boundary construction, with the
// cumulative graph drift held under eps / k.
// --------------------------------------------------------------------------
inline void cmd_stagewise(RunContext& ctx) {
  ConfigReader& r = ctx.reader;
  int k = static_cast<int>(r.get_int("params", "k", 3));
  double radius = r.get_double("params", "radius", 5.0);
  double eps = r.get_double("params", "eps", 0.1);
  int stages = static_cast<int>(r.get_int("params", "stages", 3));
  r.finish();

  std::vector<StageRecord> recs = stagewise_construct(k, radius, eps, stages);

  CsvTable t({"stage", "log_alpha", "c_n", "c0_closeness", "c1_closeness"});
  double drift = 0.0;
  nlohmann::json stage_rows = nlohmann::json::array();
  for (const StageRecord& st : recs) {
    drift += st.c0_closeness;
    t.add_row({csv_cell(st.n), csv_cell(st.alpha_n.lm), csv_cell(st.c_n),
               csv_cell(st.c0_closeness),
               st.c1_closeness ? csv_cell(*st.c1_closeness) : std::string()});
    nlohmann::json row;
    row["stage"] = st.n;
    row["log_alpha"] = st.alpha_n.lm;
    row["c_n"] = st.c_n;
    row["c0_closeness"] = st.c0_closeness;
    stage_rows.push_back(row);
  }
  ctx.emit("stagewise.csv", t.to_bytes());

  double drift_bound = eps / k;
  if (drift > drift_bound) ctx.violations = 1;
  ctx.results["stages"] = stage_rows;
  ctx.results["drift"] = drift;
  ctx.results["drift_bound"] = drift_bound;
  ctx.logline(strprintf("stagewise: %d stages, drift %.3g (bound %.3g)", stages, drift,
                        drift_bound));
}

// --------------------------------------------------------------------------
// levi: smoothness and pseudoconvexity diagnostics of a stage boundary.
// --------------------------------------------------------------------------
inline void cmd_levi(RunContext& ctx) {
  ConfigReader& r = ctx.reader;
  MapSequence s = parse_sequence(r);
  int k = s.dim();
  int stage = static_cast<int>(r.get_int("params", "stage", 1));
  double face_radius = r.get_double("params", "face_radius", 5.0);
  int nodes = static_cast<int>(r.get_int("params", "nodes", 4));
  DefiningCheckParams p;
  p.h = r.get_double("params", "h", 1e-4);
  p.on_surface_tol = r.get_double("params", "on_surface_tol", 1e-6);
  double levi_margin = r.get_double("params", "levi_margin", 1e-3);
  double wedge_min = r.get_double("params", "wedge_min", 0.1);
  r.finish();

  DefiningFunctionReport rep = defining_function_checks(s, stage, k, face_radius, nodes, ctx.seed, p);
  if (rep.levi_min_eigen < -levi_margin) ++ctx.violations;
  if (rep.wedge_gram_min < wedge_min) ++ctx.violations;

  CsvTable t({"sample", "gradient_norm"});
  for (size_t i = 0; i < rep.gradient_norms.size(); ++i)
    t.add_row({csv_cell(static_cast<int>(i)), csv_cell(rep.gradient_norms[i])});
  ctx.emit("levi.csv", t.to_bytes());
  ctx.results["levi_min_eigen"] = rep.levi_min_eigen;
  ctx.results["levi_normal_max"] = rep.levi_normal_max;
  ctx.results["wedge_gram_min"] = rep.wedge_gram_min;
  ctx.results["skipped"] = rep.skipped;
  ctx.logline(strprintf("levi: stage %d, min eigen %.3g, wedge %.3g, %d skipped", stage,
                        rep.levi_min_eigen, rep.wedge_gram_min, rep.skipped));
}

inline void dispatch(RunContext& ctx) {
  const std::string& c = ctx.command;
  if (c == "basin") return cmd_basin(ctx);
  if (c == "potential") return cmd_potential(ctx);
  if (c == "green") return cmd_green(ctx);
  if (c == "filtration") return cmd_filtration(ctx);
  if (c == "region-test") return cmd_region_test(ctx);
  if (c == "prop12") return cmd_prop12(ctx);
  if (c == "disjoint") return cmd_disjoint(ctx);
  if (c == "avoid-variety") return cmd_avoid_variety(ctx);
  if (c == "fb-inclusion") return cmd_fb_inclusion(ctx);
  if (c == "eta-check") return cmd_eta_check(ctx);
  if (c == "boundary") return cmd_boundary(ctx);
  if (c == "stagewise") return cmd_stagewise(ctx);
  if (c == "levi") return cmd_levi(ctx);
  throw ConfigError("unknown command '" + c + "'");
}

}  // namespace detail_run

// Parses, runs and persists one configured pipeline. Throws ConfigError /
// std::exception subclasses for configuration and runtime failures (the CLI
// maps those to exit code 2).
inline RunArtifacts run_config_text(const std::string& text, const RunOverrides& over,
                                    std::ostream& log) {
  auto t_start = std::chrono::steady_clock::now();
  detail_run::RunContext ctx{ConfigReader(parse_ini(text))};
  ctx.log = &log;

  ctx.command = ctx.reader.require_string("run", "command");
  ctx.seed = ctx.reader.get_u64("run", "seed", 0);
  if (over.seed) {
    ctx.seed = *over.seed;
    ctx.reader.override_value("run", "seed", std::to_string(*over.seed));
  }
  ctx.out_dir = ctx.reader.get_string("run", "out_dir", "out");
  if (over.out_dir) {
    ctx.out_dir = *over.out_dir;
    ctx.reader.override_value("run", "out_dir", *over.out_dir);
  }
  ctx.threads_setting = ctx.reader.get_string("run", "threads", "auto");
  if (over.threads) {
    ctx.threads_setting = *over.threads;
    ctx.reader.override_value("run", "threads", *over.threads);
  }
  if (ctx.threads_setting == "auto") {
    unsigned hw = std::thread::hardware_concurrency();
    ctx.threads = hw == 0 ? 1 : static_cast<int>(hw);
  } else {
    errno = 0;
    char* end = nullptr;
    long v = std::strtol(ctx.threads_setting.c_str(), &end, 10);
    if (errno != 0 || end == ctx.threads_setting.c_str() || *end != '\0' || v < 1)
      throw ConfigError("threads must be a positive integer or 'auto'");
    ctx.threads = static_cast<int>(v);
  }

  std::filesystem::create_directories(ctx.out_dir);
  detail_run::dispatch(ctx);

  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  nlohmann::json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kToolVersion;
  manifest["command"] = ctx.command;
  manifest["seed"] = ctx.seed;
  manifest["threads"] = ctx.threads;
  manifest["config"] = ctx.reader.echo();
  manifest["outputs"] = ctx.outputs;
  manifest["results"] = ctx.results;
  manifest["violations"] = ctx.violations;
  manifest["wall_clock_seconds"] = wall;
  write_text_file((std::filesystem::path(ctx.out_dir) / "manifest.json").string(),
                  manifest.dump(2) + "\n");

  RunArtifacts art;
  art.command = ctx.command;
  art.out_dir = ctx.out_dir;
  art.output_digests = ctx.outputs;
  art.violations = ctx.violations;
  art.exit_code = ctx.violations > 0 ? 1 : 0;
  ctx.logline(strprintf("%s: exit %d, %lld violations, manifest written", ctx.command.c_str(),
                        art.exit_code, art.violations));
  return art;
}

inline RunArtifacts run_config_file(const std::string& path, const RunOverrides& over,
                                    std::ostream& log) {
  return run_config_text(read_text_file(path), over, log);
}

}  // namespace shortck

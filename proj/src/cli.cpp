#include "framemap/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <ostream>

#include "framemap/analysis.hpp"
#include "framemap/jacobian.hpp"
#include "framemap/rng.hpp"

namespace framemap {

namespace {

using Json = nlohmann::ordered_json;

Json json_vec(const VecN& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json json_mat(const MatN& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

Json json_estimate(const Estimate& e) {
  return Json{{"value", e.value},
              {"std_error", e.std_error},
              {"samples", e.samples},
              {"seed", e.seed},
              {"retries", e.retries}};
}

std::vector<double> parse_list(const std::string& s) { return to_std(parse_vec(s)); }

ConeSet parse_cone_set(const std::string& s, int n) {
  ConeSet set;
  if (s == "all") return ConeSet::all(n);
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const char last = tok.back();
    if (last != '+' && last != '-')
      throw ValidationError("cone '" + tok + "' must end in + or - (e.g. 1+,3-)");
    const int axis = std::stoi(tok.substr(0, tok.size() - 1));
    if (axis < 1 || axis > n) throw ValidationError("cone axis out of range in '" + tok + "'");
    set.add(ConeId{axis, last == '+' ? +1 : -1});
  }
  return set;
}

std::vector<Cell> load_cells(const std::string& path, int n) {
  if (path.empty()) {
    Cell unit;
    unit.center = VecN::Zero(n);
    unit.half_side = 1.0;
    return {unit};
  }
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open cells file '" + path + "'");
  Json doc = Json::parse(in);
  std::vector<Cell> cells;
  for (const auto& c : doc) {
    Cell cell;
    const auto& ctr = c.at("center");
    cell.center = VecN(static_cast<Eigen::Index>(ctr.size()));
    for (size_t i = 0; i < ctr.size(); ++i) cell.center[static_cast<Eigen::Index>(i)] = ctr[i];
    cell.half_side = c.at("half_side");
    cells.push_back(cell);
  }
  if (cells.empty()) throw ValidationError("cells file holds no cells");
  return cells;
}

MatN load_matrix(const std::string& inline_spec, const std::string& path, int n) {
  if (!inline_spec.empty()) return parse_mat(inline_spec);
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open matrix file '" + path + "'");
    Json doc = Json::parse(in);
    const Json& rows = doc.is_object() ? doc.at("matrix") : doc;
    MatN m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.at(0).size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        m(i, j) = rows.at(static_cast<size_t>(i)).at(static_cast<size_t>(j));
    return m;
  }
  return MatN(MatN::Identity(n, n));
}

struct Common {
  std::uint64_t seed = 12345;
  std::string format = "json";
  std::string out_path;
  int workers = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "RNG seed")->envname("FRAME_MAP_SEED");
    cmd->add_option("--format", format, "Report format: json | csv (csv: per-sample rows)")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--out", out_path, "Write the report to this file instead of stdout");
    cmd->add_option("--workers", workers, "Worker threads for sampling loops")
        ->check(CLI::Range(1, 64));
  }
};

struct Emitter {
  const Common& common;
  std::ostream& fallback;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void emit_json(Json& report) const {
    report["wall_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
            .count();
    write(report.dump(2) + "\n");
  }

  void emit_csv(const std::string& header, const std::vector<std::string>& rows) const {
    std::string text = header + "\n";
    for (const auto& r : rows) text += r + "\n";
    write(text);
  }

  void write(const std::string& text) const {
    if (common.out_path.empty()) {
      fallback << text;
      return;
    }
    std::ofstream f(common.out_path);
    if (!f) throw ValidationError("cannot open output file '" + common.out_path + "'");
    f << text;
  }
};

void reject_csv(const Common& common, const char* command) {
  if (common.format == "csv")
    throw ValidationError(std::string(command) +
                          ": csv is only available for per-sample commands "
                          "(seminorm --method mc, rank-survey, trace-check)");
}

Json report_skeleton(const std::string& command, std::uint64_t seed) {
  Json r;
  r["schema"] = "frame-map/1";
  r["version"] = "0.1.0";
  r["command"] = command;
  r["seed"] = seed;
  return r;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------

struct EvalCmd {
  Common common;
  int n = 3, k = 2, k_max = 40;
  std::string map = "u", point, subdivide, matrix, matrix_file, offset, cells_file;
  bool piece = false;

  int execute(std::ostream& out) {
    reject_csv(common, "eval");
    Emitter em{common, out};
    MapSpec spec{n, k, k_max, kMaxDim};
    const VecN x = parse_vec(point);
    Json rep = report_skeleton("eval", common.seed);
    rep["inputs"] = {{"dim", n}, {"frame", k}, {"map", map}, {"point", to_std(x)}};

    Json results;
    if (map == "naive") {
      results["value"] = json_vec(naive_edge_map(x));
    } else if (map == "naive-v") {
      results["value"] = json_vec(naive_subdivided_c1(x));
    } else if (map == "affine") {
      AffineMap g;
      g.matrix = load_matrix(matrix, matrix_file, n);
      g.offset = offset.empty() ? VecN(VecN::Zero(g.matrix.rows())) : parse_vec(offset);
      const std::vector<Cell> cells = load_cells(cells_file, n);
      EvalRequest req;
      req.piece = piece;
      const EvalResult res = affine_frame_map(g, spec, cells, x, req);
      results["value"] = json_vec(res.value);
      if (piece) results["piece"] = res.piece.to_string();
    } else {
      EvalRequest req;
      req.piece = piece;
      const MapKind kind = parse_map_kind(map);
      const ConeSet set = subdivide.empty() ? (kind == MapKind::v ? ConeSet::single(ConeId{1, +1})
                                                                  : ConeSet{})
                                            : parse_cone_set(subdivide, n);
      const EvalResult res = evaluate(spec, kind, x, set, req);
      results["value"] = json_vec(res.value);
      if (piece) results["piece"] = res.piece.to_string();
    }
    rep["results"] = results;
    em.emit_json(rep);
    return 0;
  }
};

struct JacobianCmd {
  Common common;
  int n = 3, k = 2, k_max = 40;
  std::string map = "u", point, subdivide, model = "exact";
  bool fd = false;
  double h = 1e-5, stratum_tol = 1e-12, rank_tol = 1e-8;

  int execute(std::ostream& out) {
    reject_csv(common, "jacobian");
    Emitter em{common, out};
    MapSpec spec{n, k, k_max, kMaxDim};
    const VecN x = parse_vec(point);
    const MapKind kind = parse_map_kind(map);
    const ConeSet set = subdivide.empty() ? ConeSet{} : parse_cone_set(subdivide, n);
    const GradModel gm = model == "radial" ? GradModel::radial : GradModel::exact;

    const JacobianReport jr = fd ? jac_fd(spec, kind, x, h, set)
                                 : jac_analytic(spec, kind, x, set, gm, stratum_tol, rank_tol);
    Json rep = report_skeleton("jacobian", common.seed);
    rep["inputs"] = {{"dim", n},     {"frame", k}, {"map", map}, {"point", to_std(x)},
                     {"fd", fd},     {"h", h},     {"model", model}};
    rep["results"] = {{"matrix", json_mat(jr.matrix)},
                      {"singular_values", json_vec(jr.singular_values)},
                      {"rank", jr.numerical_rank},
                      {"piece", jr.piece.to_string()}};
    em.emit_json(rep);
    return 0;
  }
};

struct RankSurveyCmd {
  Common common;
  int n = 3, k = 2, k_max = 40;
  std::string map = "w";
  long samples = 10000;
  double tol = 1e-8;
  int max_rank = -1;  // default k-1
  double sigma_ratio = 0.0, sigma_frac = 0.0;

  int execute(std::ostream& out) {
    Emitter em{common, out};
    MapSpec spec{n, k, k_max, kMaxDim};
    spec.validate();
    const MapKind kind = parse_map_kind(map);
    const int want = max_rank < 0 ? k - 1 : max_rank;

    long over_rank = 0, attained = 0;
    int worst_rank = 0;
    double max_spurious = 0.0;  // sigma_{want+1} / sigma_1
    std::vector<std::string> rows;
    for (long i = 0; i < samples; ++i) {
      JacobianReport jr;
      bool ok = false;
      for (int a = 0; a < 100 && !ok; ++a) {
        Rng rng(common.seed, static_cast<std::uint64_t>(i) * 128 + a);
        VecN x(n);
        for (int j = 0; j < n; ++j) x[j] = rng.symmetric();
        try {
          jr = jac_analytic(spec, kind, x, ConeSet{}, GradModel::exact, 1e-12, tol);
          ok = true;
        } catch (const EvalError&) {
        }
      }
      if (!ok) throw RetryExhausted("rank survey: sample " + std::to_string(i));
      worst_rank = std::max(worst_rank, jr.numerical_rank);
      if (jr.numerical_rank > want) ++over_rank;
      const VecN& sv = jr.singular_values;
      if (want < sv.size() && sv[0] > 0.0)
        max_spurious = std::max(max_spurious, sv[want] / sv[0]);
      if (want >= 1 && want - 1 < sv.size() && sv[0] > 0.0 && sigma_ratio > 0.0 &&
          sv[want - 1] / sv[0] > sigma_ratio)
        ++attained;
      if (common.format == "csv") {
        std::string row = std::to_string(i) + "," + std::to_string(jr.numerical_rank);
        for (Eigen::Index s = 0; s < sv.size(); ++s) row += "," + fmt(sv[s]);
        rows.push_back(row);
      }
    }

    const double attained_frac = static_cast<double>(attained) / static_cast<double>(samples);
    const bool rank_ok = over_rank == 0;
    const bool attain_ok =
        sigma_ratio <= 0.0 || attained_frac >= sigma_frac;

    if (common.format == "csv") {
      em.emit_csv("sample,rank,sigma...", rows);
    } else {
      Json rep = report_skeleton("rank-survey", common.seed);
      rep["inputs"] = {{"dim", n},           {"frame", k}, {"map", map},
                       {"samples", samples}, {"tol", tol}, {"max_rank", want},
                       {"sigma_ratio", sigma_ratio}, {"sigma_frac", sigma_frac}};
      rep["results"] = {{"worst_rank", worst_rank},
                        {"points_over_rank", over_rank},
                        {"max_spurious_sigma_ratio", max_spurious},
                        {"attained_fraction", attained_frac},
                        {"rank_bound_holds", rank_ok},
                        {"attainment_holds", attain_ok}};
      em.emit_json(rep);
    }
    if (!rank_ok)
      throw ContractViolation("rank bound violated at " + std::to_string(over_rank) + " points");
    if (!attain_ok)
      throw ContractViolation("sigma ratio attained only at " + std::to_string(attained_frac) +
                              " of points");
    return 0;
  }
};

struct SeminormCmd {
  Common common;
  int n = 2, k = 2, k_max = 40;
  double p = 1.0;
  std::string method = "recursive", map = "u", model = "exact", sampler = "auto", subdivide;
  long samples = 100000;

  int execute(std::ostream& out) {
    Emitter em{common, out};
    Json rep = report_skeleton("seminorm", common.seed);
    rep["inputs"] = {{"dim", n},     {"frame", k},   {"p", p},          {"method", method},
                     {"map", map},   {"model", model}, {"sampler", sampler}, {"samples", samples}};
    if (method == "recursive") {
      rep["results"] = {{"value", seminorm_recursive(n, k, p)}};
      em.emit_json(rep);
      return 0;
    }
    if (method != "mc") throw ValidationError("method must be recursive | mc");
    MapSpec spec{n, k, k_max, kMaxDim};
    SeminormOptions opt;
    opt.map = parse_map_kind(map);
    opt.model = model == "radial" ? GradModel::radial : GradModel::exact;
    opt.sampler = parse_sampler(sampler);
    opt.workers = common.workers;
    if (opt.map == MapKind::v)
      opt.subdivided = subdivide.empty() ? ConeSet::single(ConeId{1, +1})
                                         : parse_cone_set(subdivide, n);
    std::vector<double> rows;
    if (common.format == "csv") opt.sample_rows = &rows;
    const Estimate est = seminorm_mc(spec, p, samples, common.seed, opt);
    if (common.format == "csv") {
      std::vector<std::string> lines;
      lines.reserve(rows.size());
      for (size_t i = 0; i < rows.size(); ++i) lines.push_back(std::to_string(i) + "," + fmt(rows[i]));
      em.emit_csv("sample,weighted_value", lines);
      return 0;
    }
    rep["results"] = {{"estimate", json_estimate(est)}};
    try {
      rep["results"]["recursive_value"] = seminorm_recursive(n, k, p);
    } catch (const ValidationError&) {
    }
    em.emit_json(rep);
    return 0;
  }
};

struct ShellCmd {
  Common common;
  int n = 3, k = 2, k_max = 40;
  double p = 1.0;
  long samples = 50000;
  std::string generations = "2,3,4";

  int execute(std::ostream& out) {
    reject_csv(common, "shell-check");
    Emitter em{common, out};
    MapSpec spec{n, k, k_max, kMaxDim};
    std::vector<int> gens;
    for (double g : parse_list(generations)) gens.push_back(static_cast<int>(g));
    const ShellReport sr = shell_identity_check(spec, p, samples, common.seed, gens, common.workers);

    Json rep = report_skeleton("shell-check", common.seed);
    rep["inputs"] = {{"dim", n}, {"frame", k}, {"p", p}, {"samples", samples},
                     {"generations", gens}};
    Json per = Json::array();
    bool ok = true;
    for (const auto& sg : sr.generations) {
      per.push_back({{"generation", sg.generation},
                     {"cube_integral", json_estimate(sg.cube_integral)},
                     {"scaled_unit_integral", json_estimate(sg.scaled_unit)},
                     {"ratio", sg.ratio},
                     {"ratio_se", sg.ratio_se},
                     {"ring_mc", json_estimate(sg.ring_mc)},
                     {"ring_counts", sg.ring_counts},
                     {"ring_counts_se", sg.ring_counts_se}});
      if (std::abs(sg.ratio - 1.0) > 3.0 * sg.ratio_se) ok = false;
    }
    Json cls = Json::array();
    for (const auto& e : sr.class_unit_integrals) cls.push_back(json_estimate(e));
    rep["results"] = {{"per_generation", per},
                      {"class_unit_integrals", cls},
                      {"shell_total_counts", sr.shell_total_counts},
                      {"single_cone_form_total", sr.single_cone_form_total},
                      {"per_cube_identity_holds", ok}};
    em.emit_json(rep);
    if (!ok) throw ContractViolation("per-cube scaling identity off by more than 3 sigma");
    return 0;
  }
};

struct TraceCmd {
  Common common;
  int n = 3, k = 2, k_max = 40;
  std::string eps_list = "1e-2,1e-3,1e-4";
  long samples = 20000;

  int execute(std::ostream& out) {
    Emitter em{common, out};
    MapSpec spec{n, k, k_max, kMaxDim};
    spec.validate();
    Json rep = report_skeleton("trace-check", common.seed);
    rep["inputs"] = {{"dim", n}, {"frame", k}, {"eps", parse_list(eps_list)}, {"samples", samples}};
    Json per = Json::array();
    std::vector<std::string> csv_rows;
    bool ok = true;
    const double bound_factor = 8.0 * std::sqrt(static_cast<double>(n));
    for (double eps : parse_list(eps_list)) {
      std::vector<double> rows;
      const TraceReport tr =
          boundary_trace_scan(spec, eps, samples, common.seed, common.workers,
                              common.format == "csv" ? &rows : nullptr);
      per.push_back({{"eps", tr.eps},
                     {"max_dev", tr.max_dev},
                     {"mean_dev", tr.mean_dev},
                     {"bound", bound_factor * eps}});
      if (tr.max_dev > bound_factor * eps) ok = false;
      for (size_t i = 0; i < rows.size(); ++i)
        csv_rows.push_back(fmt(eps) + "," + std::to_string(i) + "," + fmt(rows[i]));
    }
    if (common.format == "csv") {
      em.emit_csv("eps,sample,deviation", csv_rows);
    } else {
      rep["results"] = {{"per_eps", per}, {"bound_holds", ok}};
      em.emit_json(rep);
    }
    if (!ok) throw ContractViolation("boundary deviation exceeds 8 sqrt(n) eps");
    return 0;
  }
};

struct ContinuityCmd {
  Common common;
  int n = 3, k = 2, k_max = 40;
  std::string family = "all", deltas = "1e-4,1e-6,1e-8";
  long pairs = 500;

  int execute(std::ostream& out) {
    reject_csv(common, "continuity-check");
    Emitter em{common, out};
    MapSpec spec{n, k, k_max, kMaxDim};
    spec.validate();
    std::vector<BoundaryFamily> fams;
    if (family == "all")
      fams = {BoundaryFamily::cone, BoundaryFamily::quadrant, BoundaryFamily::whitney};
    else
      fams = {parse_family(family)};

    Json rep = report_skeleton("continuity-check", common.seed);
    rep["inputs"] = {{"dim", n}, {"frame", k}, {"family", family}, {"deltas", parse_list(deltas)},
                     {"pairs", pairs}};
    Json per = Json::array();
    bool ok = true;
    for (BoundaryFamily f : fams)
      for (double d : parse_list(deltas)) {
        const ContinuityReport cr = continuity_scan(spec, f, d, pairs, common.seed);
        per.push_back({{"family", to_string(f)},
                       {"delta", cr.delta},
                       {"max_jump", cr.max_jump},
                       {"max_lipschitz_ratio", cr.max_lipschitz_ratio},
                       {"filtered", cr.filtered}});
        if (cr.max_jump > 100.0 * d || cr.max_lipschitz_ratio > 100.0) ok = false;
      }
    rep["results"] = {{"scans", per}, {"continuous", ok}};
    em.emit_json(rep);
    if (!ok) throw ContractViolation("jump exceeds the local Lipschitz scale: hidden discontinuity");
    return 0;
  }
};

struct GrowthCmd {
  Common common;
  int n = 2, k = 2, k_max = 40;
  std::string integrand = "fro", xi_spec, xi_file, t_list = "1,10,100,1000";
  double expo = 1.0;
  int minor_size = 2, rays = 0;
  long samples = 100000;

  int execute(std::ostream& out) {
    reject_csv(common, "growth-cert");
    Emitter em{common, out};
    MapSpec spec{n, k, k_max, kMaxDim};
    spec.validate();
    const Integrand f = Integrand::parse(integrand, expo, minor_size);

    std::vector<MatN> bases;
    if (rays > 0) {
      for (int r = 0; r < rays; ++r) {
        Rng rng(common.seed, 9000 + r);
        MatN m(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) m(i, j) = rng.symmetric();
        m /= m.norm();
        bases.push_back(m);
      }
    } else {
      bases.push_back(load_matrix(xi_spec, xi_file, n));
    }

    Json rep = report_skeleton("growth-cert", common.seed);
    rep["inputs"] = {{"dim", n},       {"frame", k},        {"integrand", f.name()},
                     {"rays", rays},   {"t", parse_list(t_list)}, {"samples", samples}};
    Json entries = Json::array();
    bool bounded_ok = true, flat_ok = true;
    double bound = 0.0;
    const bool certify = f.kind == Integrand::Kind::frobenius_pow && expo == 1.0;
    if (certify) bound = 1.0 + seminorm_recursive(n, k, 1.0);

    int ray_id = 0;
    for (const MatN& base : bases) {
      std::vector<double> scale_free;
      Json ts = Json::array();
      for (double t : parse_list(t_list)) {
        const GrowthReport gr =
            growth_certificate(spec, MatN(t * base), f, samples, common.seed, common.workers);
        ts.push_back({{"t", t},
                      {"total", gr.total},
                      {"total_se", gr.total_se},
                      {"mean", json_estimate(gr.mean)},
                      {"lower", gr.lower},
                      {"lower_bound_ok", gr.lower_bound_ok},
                      {"l_prime", gr.l_prime},
                      {"scale_free", gr.scale_free}});
        if (gr.scale_free > 0.0) scale_free.push_back(gr.scale_free);
        if (certify && gr.l_prime > bound) bounded_ok = false;
      }
      if (certify && scale_free.size() >= 2) {
        const auto [lo, hi] = std::minmax_element(scale_free.begin(), scale_free.end());
        if ((*hi - *lo) / *lo > 0.05) flat_ok = false;
      }
      entries.push_back({{"ray", ray_id++}, {"xi0", json_mat(base)}, {"certificates", ts}});
    }
    rep["results"] = {{"rays", entries}};
    if (certify) {
      rep["results"]["l_prime_bound"] = bound;
      rep["results"]["bounded"] = bounded_ok;
      rep["results"]["ray_invariant_within_5pct"] = flat_ok;
    }
    em.emit_json(rep);
    if (certify && (!bounded_ok || !flat_ok))
      throw ContractViolation("growth certificate: L' escaped its bound along a ray");
    return 0;
  }
};

struct DetScanCmd {
  Common common;
  int n = 2, k = 2, k_max = 40;
  std::string xi_spec, xi_file;
  long samples = 10000;
  double tol = 1e-8;

  int execute(std::ostream& out) {
    reject_csv(common, "det-scan");
    Emitter em{common, out};
    MapSpec spec{n, k, k_max, kMaxDim};
    spec.validate();
    const MatN xi = load_matrix(xi_spec, xi_file, n);
    const DetScanReport dr = det_vanishing_scan(spec, xi, samples, common.seed, common.workers);
    Json rep = report_skeleton("det-scan", common.seed);
    rep["inputs"] = {{"dim", n}, {"frame", k}, {"samples", samples}, {"tol", tol}};
    Json per = Json::array();
    bool ok = true;
    for (const auto& e : dr.by_size) {
      per.push_back({{"minor_size", e.minor_size}, {"max_rel_det", e.max_rel}});
      if (e.minor_size >= k && e.max_rel > tol) ok = false;
    }
    rep["results"] = {{"by_size", per}, {"rank_deficient_minors_vanish", ok}};
    em.emit_json(rep);
    if (!ok)
      throw ContractViolation("a minor of size >= k failed to vanish to relative " +
                              std::to_string(tol));
    return 0;
  }
};

struct WhitneyCmd {
  Common common;
  int n = 2, k_max = 40, ring = 0;
  std::string point;

  int execute(std::ostream& out) {
    reject_csv(common, "whitney-locate");
    Emitter em{common, out};
    if (ring == 0 && point.empty())
      throw ValidationError("whitney-locate: give --point and/or --ring");
    Json rep = report_skeleton("whitney-locate", common.seed);
    rep["inputs"] = {{"dim", n}, {"ring", ring}, {"point", point}};
    Json results;
    if (ring > 0) {
      const auto [inner, outer] = ring_bounds(ring);
      Json info{{"inner", inner}, {"outer", outer}};
      if (ring >= 2) {
        info["cube_count"] = count_to_string(ring_cube_count(ring, n));
        Json cls = Json::array();
        for (int f = 1; f <= n; ++f)
          cls.push_back({{"extreme_coords", f},
                         {"count", count_to_string(ring_cube_count_by_extreme(ring, n, f))}});
        info["by_class"] = cls;
      }
      results["ring"] = info;
    }
    if (!point.empty()) {
      const VecN x = parse_vec(point);
      const DyadicCube cube = locate(x, k_max);
      Json info{{"generation", cube.generation},
                {"center", json_vec(cube.center())},
                {"half_side", cube.half_side()}};
      Json faces = Json::array();
      for (int axis = 1; axis <= n; ++axis)
        for (int sign : {+1, -1}) {
          const ConeId face{axis, sign};
          faces.push_back({{"axis", axis},
                           {"sign", sign},
                           {"kind", to_string(face_neighbor_kind(cube, face, k_max))}});
        }
      info["faces"] = faces;
      results["cube"] = info;
    }
    rep["results"] = results;
    em.emit_json(rep);
    return 0;
  }
};

struct NaiveDemoCmd {
  Common common;
  std::string deltas = "1e-4,1e-6,1e-8";

  int execute(std::ostream& out) {
    reject_csv(common, "naive-demo");
    Emitter em{common, out};
    const VecN witness = make_vec({0.5, 0.5, 0.25, 0.0});
    const VecN naive = naive_edge_map(witness);
    const VecN refined = naive_subdivided_c1(witness);

    MapSpec spec{4, 2, 40, kMaxDim};
    Json rep = report_skeleton("naive-demo", common.seed);
    rep["inputs"] = {{"witness", to_std(witness)}, {"deltas", parse_list(deltas)}};

    // One-sided limits of the subdivided naive map across the boundary
    // between the first two cones, against the assembled map's behaviour.
    Json jumps = Json::array();
    bool persistent = true, assembled_continuous = true;
    for (double d : parse_list(deltas)) {
      const VecN xp = make_vec({0.5 - d / 2, 0.5 + d / 2, 0.25, 0.0});
      const VecN xm = make_vec({0.5 + d / 2, 0.5 - d / 2, 0.25, 0.0});
      const double naive_jump = (naive_subdivided_c1(xp) - naive_subdivided_c1(xm)).norm();
      const double v_jump =
          (eval_v(spec, xp, ConeSet::single(ConeId{1, +1})).value -
           eval_v(spec, xm, ConeSet::single(ConeId{1, +1})).value)
              .norm();
      jumps.push_back({{"delta", d}, {"naive_jump", naive_jump}, {"assembled_jump", v_jump}});
      if (naive_jump < 0.4) persistent = false;
      if (v_jump > 1e-3) assembled_continuous = false;
    }
    const bool confirmed = persistent && assembled_continuous &&
                           (naive - refined).norm() > 0.4;
    rep["results"] = {{"naive_value", json_vec(naive)},
                      {"subdivided_value", json_vec(refined)},
                      {"jumps", jumps},
                      {"discontinuity_confirmed", confirmed}};
    em.emit_json(rep);
    if (!confirmed) throw ContractViolation("naive-map discontinuity not reproduced");
    return 0;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"framemap: maps collapsing a cube onto a low-dimensional frame, with "
               "rank, seminorm, trace and growth verification"};
  app.require_subcommand(1);

  EvalCmd eval_cmd;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a map at a point");
  eval_cmd.common.attach(c_eval);
  c_eval->add_option("--dim", eval_cmd.n, "Ambient dimension n")->required();
  c_eval->add_option("--frame", eval_cmd.k, "Frame parameter k");
  c_eval->add_option("--kmax", eval_cmd.k_max, "Dyadic generation cap");
  c_eval->add_option("--map", eval_cmd.map, "base|u|v|w|face|naive|naive-v|affine");
  c_eval->add_option("--point", eval_cmd.point, "Comma-separated coordinates")->required();
  c_eval->add_option("--subdivide", eval_cmd.subdivide,
                     "Cones to subdivide, e.g. 1+,3- or all (map v defaults to 1+)");
  c_eval->add_option("--matrix", eval_cmd.matrix, "xi, row-major: rows ';', entries ','");
  c_eval->add_option("--matrix-file", eval_cmd.matrix_file, "JSON file with {\"matrix\": [[...]]}");
  c_eval->add_option("--offset", eval_cmd.offset, "Affine offset z");
  c_eval->add_option("--cells", eval_cmd.cells_file,
                     "JSON cells [{center, half_side}] covering the domain");
  c_eval->add_flag("--piece", eval_cmd.piece, "Report the smooth-piece key");

  JacobianCmd jac_cmd;
  auto* c_jac = app.add_subcommand("jacobian", "Analytic or finite-difference Jacobian");
  jac_cmd.common.attach(c_jac);
  c_jac->add_option("--dim", jac_cmd.n)->required();
  c_jac->add_option("--frame", jac_cmd.k);
  c_jac->add_option("--kmax", jac_cmd.k_max);
  c_jac->add_option("--map", jac_cmd.map, "base|u|v|w|face");
  c_jac->add_option("--point", jac_cmd.point)->required();
  c_jac->add_option("--subdivide", jac_cmd.subdivide);
  c_jac->add_flag("--fd", jac_cmd.fd, "Central differences instead of the chain rule");
  c_jac->add_option("--step", jac_cmd.h, "FD step");
  c_jac->add_option("--model", jac_cmd.model, "exact | radial (drop cone-apex columns)");
  c_jac->add_option("--stratum-tol", jac_cmd.stratum_tol);
  c_jac->add_option("--rank-tol", jac_cmd.rank_tol);

  RankSurveyCmd rank_cmd;
  auto* c_rank = app.add_subcommand("rank-survey", "Numerical rank at seeded random points");
  rank_cmd.common.attach(c_rank);
  c_rank->add_option("--dim", rank_cmd.n)->required();
  c_rank->add_option("--frame", rank_cmd.k);
  c_rank->add_option("--kmax", rank_cmd.k_max);
  c_rank->add_option("--map", rank_cmd.map);
  c_rank->add_option("--samples", rank_cmd.samples)
      ->description("Sample count (csv columns: sample,rank,sigma_1..sigma_n)");
  c_rank->add_option("--tol", rank_cmd.tol, "SVD rank tolerance (relative)");
  c_rank->add_option("--max-rank", rank_cmd.max_rank, "Contract bound (default k-1)");
  c_rank->add_option("--sigma-ratio", rank_cmd.sigma_ratio,
                     "Require sigma_maxrank/sigma_1 above this...");
  c_rank->add_option("--sigma-frac", rank_cmd.sigma_frac, "...at at least this fraction of points");

  SeminormCmd semi_cmd;
  auto* c_semi = app.add_subcommand("seminorm", "L^p gradient integral: closed form or MC");
  semi_cmd.common.attach(c_semi);
  c_semi->add_option("--dim", semi_cmd.n)->required();
  c_semi->add_option("--frame", semi_cmd.k);
  c_semi->add_option("--kmax", semi_cmd.k_max);
  c_semi->add_option("--p", semi_cmd.p)->required();
  c_semi->add_option("--method", semi_cmd.method, "recursive | mc");
  c_semi->add_option("--map", semi_cmd.map, "base|u|v|w|face");
  c_semi->add_option("--model", semi_cmd.model, "exact | radial gradient model");
  c_semi->add_option("--sampler", semi_cmd.sampler, "auto|uniform|radial|model");
  c_semi->add_option("--subdivide", semi_cmd.subdivide, "Cones for map v");
  c_semi->add_option("--samples", semi_cmd.samples)
      ->description("Sample count (csv columns: sample,weighted_value)");

  ShellCmd shell_cmd;
  auto* c_shell = app.add_subcommand("shell-check", "Per-cube scaling and shell identities");
  shell_cmd.common.attach(c_shell);
  c_shell->add_option("--dim", shell_cmd.n)->required();
  c_shell->add_option("--frame", shell_cmd.k);
  c_shell->add_option("--kmax", shell_cmd.k_max);
  c_shell->add_option("--p", shell_cmd.p);
  c_shell->add_option("--samples", shell_cmd.samples);
  c_shell->add_option("--generations", shell_cmd.generations);

  TraceCmd trace_cmd;
  auto* c_trace = app.add_subcommand("trace-check", "Boundary deviation |w(x)-x| near the cube edge");
  trace_cmd.common.attach(c_trace);
  c_trace->add_option("--dim", trace_cmd.n)->required();
  c_trace->add_option("--frame", trace_cmd.k);
  c_trace->add_option("--kmax", trace_cmd.k_max);
  c_trace->add_option("--eps", trace_cmd.eps_list, "Comma-separated distances");
  c_trace->add_option("--samples", trace_cmd.samples)
      ->description("Samples per eps (csv columns: eps,sample,deviation)");

  ContinuityCmd cont_cmd;
  auto* c_cont = app.add_subcommand("continuity-check", "Jumps across piece boundaries");
  cont_cmd.common.attach(c_cont);
  c_cont->add_option("--dim", cont_cmd.n)->required();
  c_cont->add_option("--frame", cont_cmd.k);
  c_cont->add_option("--kmax", cont_cmd.k_max);
  c_cont->add_option("--family", cont_cmd.family, "cone|quadrant|whitney|all");
  c_cont->add_option("--deltas", cont_cmd.deltas);
  c_cont->add_option("--pairs", cont_cmd.pairs);

  GrowthCmd growth_cmd;
  auto* c_growth = app.add_subcommand("growth-cert", "Growth-transfer certificate along rays");
  growth_cmd.common.attach(c_growth);
  c_growth->add_option("--dim", growth_cmd.n)->required();
  c_growth->add_option("--frame", growth_cmd.k);
  c_growth->add_option("--kmax", growth_cmd.k_max);
  c_growth->add_option("--integrand", growth_cmd.integrand, "fro|det|minor");
  c_growth->add_option("--expo", growth_cmd.expo, "Exponent q or alpha");
  c_growth->add_option("--minor-size", growth_cmd.minor_size);
  c_growth->add_option("--xi", growth_cmd.xi_spec, "Matrix (row-major, ';' rows)");
  c_growth->add_option("--xi-file", growth_cmd.xi_file);
  c_growth->add_option("--rays", growth_cmd.rays, "Use this many random unit-norm rays");
  c_growth->add_option("--t", growth_cmd.t_list, "Scales along each ray");
  c_growth->add_option("--samples", growth_cmd.samples);

  DetScanCmd det_cmd;
  auto* c_det = app.add_subcommand("det-scan", "Minor determinants of xi grad w");
  det_cmd.common.attach(c_det);
  c_det->add_option("--dim", det_cmd.n)->required();
  c_det->add_option("--frame", det_cmd.k);
  c_det->add_option("--kmax", det_cmd.k_max);
  c_det->add_option("--xi", det_cmd.xi_spec);
  c_det->add_option("--xi-file", det_cmd.xi_file);
  c_det->add_option("--samples", det_cmd.samples);
  c_det->add_option("--tol", det_cmd.tol);

  WhitneyCmd whitney_cmd;
  auto* c_whit = app.add_subcommand("whitney-locate", "Dyadic decomposition queries");
  whitney_cmd.common.attach(c_whit);
  c_whit->add_option("--dim", whitney_cmd.n)->required();
  c_whit->add_option("--kmax", whitney_cmd.k_max);
  c_whit->add_option("--point", whitney_cmd.point, "Locate the cube containing this point");
  c_whit->add_option("--ring", whitney_cmd.ring, "Report bounds and counts of this generation");

  NaiveDemoCmd naive_cmd;
  auto* c_naive = app.add_subcommand("naive-demo",
                                     "The 4-D witness point where the direct edge map cannot be "
                                     "refined continuously");
  naive_cmd.common.attach(c_naive);
  c_naive->add_option("--deltas", naive_cmd.deltas);

  std::vector<const char*> argv;
  argv.push_back("framemap");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (c_eval->parsed()) return eval_cmd.execute(out);
    if (c_jac->parsed()) return jac_cmd.execute(out);
    if (c_rank->parsed()) return rank_cmd.execute(out);
    if (c_semi->parsed()) return semi_cmd.execute(out);
    if (c_shell->parsed()) return shell_cmd.execute(out);
    if (c_trace->parsed()) return trace_cmd.execute(out);
    if (c_cont->parsed()) return cont_cmd.execute(out);
    if (c_growth->parsed()) return growth_cmd.execute(out);
    if (c_det->parsed()) return det_cmd.execute(out);
    if (c_whit->parsed()) return whitney_cmd.execute(out);
    if (c_naive->parsed()) return naive_cmd.execute(out);
    err << "no subcommand\n";
    return 2;
  } catch (const ContractViolation& e) {
    err << "contract violation: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    err << "invalid request: " << e.what() << "\n";
    return 2;
  } catch (const EvalError& e) {
    err << "cannot evaluate: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

std::vector<std::pair<std::string, std::vector<std::string>>> command_coverage() {
  return {
      {"eval",
       {"inf_norm", "cone_of", "face_chart", "face_unchart", "quadrant_of", "base_map", "u_eval",
        "v_eval", "w_eval", "naive_edge_map", "affine_frame_map"}},
      {"jacobian", {"jac_analytic", "jac_fd"}},
      {"rank-survey", {"rank_report"}},
      {"seminorm", {"seminorm_recursive", "seminorm_mc"}},
      {"shell-check", {"shell_identity_check"}},
      {"trace-check", {"boundary_trace_scan"}},
      {"continuity-check", {"continuity_scan"}},
      {"growth-cert", {"growth_certificate"}},
      {"det-scan", {"det_vanishing_scan"}},
      {"whitney-locate", {"ring_bounds", "ring_cube_count", "locate", "face_neighbor_kind"}},
      {"naive-demo", {"naive_subdivided_c1"}},
  };
}

}  // namespace framemap

#include "framemap/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "framemap/quadrature.hpp"
#include "framemap/rng.hpp"

namespace framemap {

namespace {

constexpr long kBlock = 4096;
constexpr int kRetryCap = 100;

struct McAccum {
  double mean = 0.0;
  double se = 0.0;
  double max_val = 0.0;
  long samples = 0;
  long retries = 0;
};

/// Blocked Monte-Carlo driver. Per-sample randomness is keyed by the sample
/// index, and block partials are combined in block order, so the result is
/// identical for any worker count.
template <class F>
McAccum run_mc(long samples, std::uint64_t seed, int workers, F&& f,
               std::vector<double>* rows = nullptr) {
  if (samples < 1) throw ValidationError("sample count must be positive");
  const long nblocks = (samples + kBlock - 1) / kBlock;
  std::vector<double> bsum(nblocks, 0.0), bsumsq(nblocks, 0.0), bmax(nblocks, 0.0);
  std::vector<long> bretry(nblocks, 0);

  auto work_block = [&](long b) {
    const long lo = b * kBlock;
    const long hi = std::min(samples, lo + kBlock);
    double s = 0.0, s2 = 0.0, mx = 0.0;
    long rt = 0;
    for (long i = lo; i < hi; ++i) {
      double y = 0.0;
      bool ok = false;
      for (int attempt = 0; attempt < kRetryCap && !ok; ++attempt) {
        Rng rng(seed, static_cast<std::uint64_t>(i) * 128 + attempt);
        try {
          y = f(rng);
          ok = true;
        } catch (const EvalError&) {
          ++rt;
        }
      }
      if (!ok)
        throw RetryExhausted("sample " + std::to_string(i) +
                             ": 100 consecutive stratum hits (geometry bug, not bad luck)");
      s += y;
      s2 += y * y;
      mx = std::max(mx, y);
      if (rows) rows->push_back(y);
    }
    bsum[b] = s;
    bsumsq[b] = s2;
    bmax[b] = mx;
    bretry[b] = rt;
  };

  if (rows) workers = 1;
  workers = std::clamp<long>(workers, 1, nblocks);
  if (workers <= 1) {
    for (long b = 0; b < nblocks; ++b) work_block(b);
  } else {
    std::atomic<long> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    for (int wkr = 0; wkr < workers; ++wkr)
      pool.emplace_back([&]() {
        try {
          for (long b = next.fetch_add(1); b < nblocks; b = next.fetch_add(1)) work_block(b);
        } catch (...) {
          std::scoped_lock lk(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  McAccum acc;
  acc.samples = samples;
  double s = 0.0, s2 = 0.0;
  for (long b = 0; b < nblocks; ++b) {
    s += bsum[b];
    s2 += bsumsq[b];
    acc.max_val = std::max(acc.max_val, bmax[b]);
    acc.retries += bretry[b];
  }
  acc.mean = s / static_cast<double>(samples);
  const double var = std::max(0.0, s2 / static_cast<double>(samples) - acc.mean * acc.mean);
  acc.se = samples > 1 ? std::sqrt(var / static_cast<double>(samples - 1)) : 0.0;
  return acc;
}

// ---------------------------------------------------------------------------
// Importance samplers. Each draw carries the log of its density w.r.t.
// Lebesgue measure on (-1,1)^n; estimators divide by it.

struct Draw {
  VecN x;
  double logq = 0.0;
};

ConeId random_cone(int d, Rng& rng) {
  const int bit = static_cast<int>(rng.below(2u * d));
  return ConeId{bit / 2 + 1, bit % 2 ? -1 : +1};
}

/// Cone + radial importance at one level: r ~ (d-p) r^(d-1-p), face uniform.
/// The density w.r.t. Lebesgue is (d-p) r^-p / (2d 2^(d-1)).
Draw draw_cone_radial(int d, double p, Rng& rng) {
  const ConeId c = random_cone(d, rng);
  const double r = std::pow(rng.uniform(), 1.0 / (d - p));
  VecN t(d - 1);
  for (int i = 0; i < d - 1; ++i) t[i] = rng.symmetric();
  Draw dr;
  dr.x = r * face_unchart(c, t);
  dr.logq = std::log(d - p) - p * std::log(r) - std::log(2.0 * d) - (d - 1) * std::log(2.0);
  return dr;
}

/// Uniform cube of generation g >= 2: class (number of extremal coordinates)
/// weighted by exact counts, then axes, signs and interior indices.
DyadicCube draw_cube_in_generation(int d, int g, Rng& rng) {
  DyadicCube cube;
  cube.dim = d;
  cube.generation = g;
  const std::int64_t U = 3 * (std::int64_t{1} << (g - 2)) - 1;  // grid cells per half-axis
  std::array<double, kMaxDim> wf{};
  double wtot = 0.0;
  for (int f = 1; f <= d; ++f) {
    wf[f - 1] = static_cast<double>(ring_cube_count_by_extreme(g, d, f));
    wtot += wf[f - 1];
  }
  double pick = rng.uniform() * wtot;
  int f = 1;
  while (f < d && pick > wf[f - 1]) pick -= wf[f - 1], ++f;

  // Extremal axes: uniform over f-subsets via a partial shuffle.
  std::array<int, kMaxDim> axes{};
  for (int i = 0; i < d; ++i) axes[i] = i;
  for (int i = 0; i < f; ++i) {
    const int j = i + static_cast<int>(rng.below(d - i));
    std::swap(axes[i], axes[j]);
  }
  std::array<bool, kMaxDim> extreme{};
  for (int i = 0; i < f; ++i) extreme[axes[i]] = true;
  for (int j = 0; j < d; ++j) {
    if (extreme[j])
      cube.idx[j] = rng.below(2) ? U - 1 : -U;
    else
      cube.idx[j] = -(U - 1) + static_cast<std::int64_t>(rng.below(2 * (U - 1)));
  }
  return cube;
}

/// Dyadic cube picked with volume-proportional probability over all of
/// (-3,3)^d (closed-form inverse CDF over generations), uniform within the
/// shell.
DyadicCube draw_cube(int d, int k_max, Rng& rng) {
  for (;;) {
    const double u = rng.uniform();
    auto cdf = [&](int g) { return std::pow((6.0 - std::ldexp(1.0, 3 - g)) / 6.0, d); };
    if (u < cdf(1)) {
      DyadicCube cube;
      cube.dim = d;
      return cube;  // central
    }
    int g = 3 - static_cast<int>(std::ceil(std::log2(6.0 * (1.0 - std::pow(u, 1.0 / d)))));
    g = std::max(g, 2);
    while (g > 2 && cdf(g - 1) >= u) --g;
    while (cdf(g) < u) ++g;
    if (g >= k_max) continue;  // probability ~2^-(d k_max); keep probes in range
    return draw_cube_in_generation(d, g, rng);
  }
}

/// Cones a cube subdivides: the outward face of every extremal coordinate
/// (all faces for the central cube). Closed form of what evaluation derives
/// by probing; the two are cross-checked in the whitney tests.
ConeSet cube_subdivision(const DyadicCube& cube) {
  if (cube.central()) return ConeSet::all(cube.dim);
  ConeSet set;
  const std::int64_t U = 3 * (std::int64_t{1} << (cube.generation - 2)) - 1;
  for (int j = 0; j < cube.dim; ++j) {
    if (cube.idx[j] == U - 1) set.add(ConeId{j + 1, +1});
    if (cube.idx[j] == -U) set.add(ConeId{j + 1, -1});
  }
  return set;
}

Draw draw_w_model(const MapSpec& spec, int d, double p, Rng& rng);

/// Full factorised importance for the cone maps: radial at this level, face
/// point from the model of the assembled (d-1)-map. On subdivided cones the
/// face point follows the quadrant-refined composition, so the density
/// tracks the integrand's singularities there too; the quadrant probability
/// 2^-(d-1) cancels the affine volume factor of the half-size copy.
Draw draw_cone_model(const MapSpec& spec, int d, double p, Rng& rng, const ConeSet& subdivided) {
  if (d == spec.k) return draw_cone_radial(d, p, rng);
  const ConeId c = random_cone(d, rng);
  const double r = std::pow(rng.uniform(), 1.0 / (d - p));
  Draw face = draw_w_model(spec, d - 1, p, rng);
  if (subdivided.contains(c)) {
    QuadrantId q;
    q.dim = d - 1;
    q.plus_mask = static_cast<std::uint32_t>(rng.below(1u << (d - 1)));
    face.x = q.center() + 0.5 * face.x;
  }
  Draw dr;
  dr.x = r * face_unchart(c, face.x);
  dr.logq = face.logq + std::log(d - p) - p * std::log(r) - std::log(2.0 * d);
  return dr;
}

/// Model draw for the assembled map. The cube probability is exactly the
/// cube's volume fraction, which cancels the affine volume factor, so the
/// density value transports unchanged from the in-cube draw.
Draw draw_w_model(const MapSpec& spec, int d, double p, Rng& rng) {
  if (d == spec.k) return draw_cone_radial(d, p, rng);
  const DyadicCube cube = draw_cube(d, spec.k_max, rng);
  Draw inner = draw_cone_model(spec, d, p, rng, cube_subdivision(cube));
  inner.x = (cube.center() + cube.half_side() * inner.x) / 3.0;
  return inner;
}

/// Level-1 radial variant: same skeleton, uniform face point.
Draw draw_w_radial(const MapSpec& spec, int d, double p, Rng& rng) {
  if (d == spec.k) return draw_cone_radial(d, p, rng);
  const DyadicCube cube = draw_cube(d, spec.k_max, rng);
  Draw inner = draw_cone_radial(d, p, rng);
  inner.x = (cube.center() + cube.half_side() * inner.x) / 3.0;
  return inner;
}

Draw draw_uniform(int n, Rng& rng) {
  Draw dr;
  dr.x = VecN(n);
  for (int i = 0; i < n; ++i) dr.x[i] = rng.symmetric();
  dr.logq = -n * std::log(2.0);
  return dr;
}

Draw draw_for(const MapSpec& spec, MapKind map, Sampler sampler, double p, const ConeSet& subdivided,
              Rng& rng) {
  if (sampler == Sampler::uniform) return draw_uniform(spec.n, rng);
  const bool model = sampler == Sampler::model;
  switch (map) {
    case MapKind::base:
    case MapKind::u:
    case MapKind::v:
      return model ? draw_cone_model(spec, spec.n, p, rng,
                                     map == MapKind::v ? subdivided : ConeSet{})
                   : draw_cone_radial(spec.n, p, rng);
    case MapKind::w:
      return model ? draw_w_model(spec, spec.n, p, rng) : draw_w_radial(spec, spec.n, p, rng);
    case MapKind::refined_face: {
      // Quadrant choice transports the density like the cube choice does.
      Draw inner = model ? draw_w_model(spec, spec.n, p, rng) : draw_w_radial(spec, spec.n, p, rng);
      QuadrantId q;
      q.dim = spec.n;
      q.plus_mask = static_cast<std::uint32_t>(rng.below(1u << spec.n));
      inner.x = q.center() + 0.5 * inner.x;
      return inner;
    }
  }
  throw Error("draw_for: unreachable");
}

double frobenius(const MatN& m) { return m.norm(); }

}  // namespace

Sampler parse_sampler(const std::string& s) {
  if (s == "auto") return Sampler::automatic;
  if (s == "uniform") return Sampler::uniform;
  if (s == "radial") return Sampler::radial;
  if (s == "model") return Sampler::model;
  throw ValidationError("unknown sampler '" + s + "' (expected auto|uniform|radial|model)");
}

double seminorm_recursive(int n, int k, double p) {
  MapSpec spec;
  spec.n = n;
  spec.k = k;
  spec.validate();
  if (!(1.0 <= p && p < static_cast<double>(k)))
    throw ExponentOutOfRange("requires 1 <= p < k (here k = " + std::to_string(k) +
                             "); the radial integral int_0^1 r^(k-1-p) dr diverges at p = k");
  double s = 2.0 * k / (k - p) * base_face_integral(k - 1, p);
  for (int d = k + 1; d <= n; ++d) s *= 2.0 * d / (d - p);
  return s;
}

Estimate seminorm_mc(const MapSpec& spec, double p, long samples, std::uint64_t seed,
                     const SeminormOptions& opt) {
  spec.validate();
  if (!(1.0 <= p && p < static_cast<double>(spec.k)))
    throw ExponentOutOfRange("requires 1 <= p < k (here k = " + std::to_string(spec.k) + ")");
  if (samples < 1000) throw ValidationError("seminorm_mc: needs at least 10^3 samples");
  Sampler sampler = opt.sampler;
  if (sampler == Sampler::automatic) sampler = p < 1.5 ? Sampler::uniform : Sampler::radial;

  EvalRequest req;
  req.jacobian = true;
  req.model = opt.model;
  req.stratum_tol = 1e-12;

  const McAccum acc = run_mc(
      samples, seed, opt.workers,
      [&](Rng& rng) {
        const Draw dr = draw_for(spec, opt.map, sampler, p, opt.subdivided, rng);
        const EvalResult res = evaluate(spec, opt.map, dr.x, opt.subdivided, req);
        return std::pow(frobenius(res.jac), p) * std::exp(-dr.logq);
      },
      opt.sample_rows);

  return Estimate{acc.mean, acc.se, samples, seed, acc.retries};
}

ShellReport shell_identity_check(const MapSpec& spec, double p, long samples, std::uint64_t seed,
                                 const std::vector<int>& generations, int workers) {
  spec.validate();
  if (spec.n == spec.k)
    throw ValidationError("shell_identity_check: no dyadic assembly at n == k");
  if (!(1.0 <= p && p < static_cast<double>(spec.k)))
    throw ExponentOutOfRange("requires 1 <= p < k");

  const int n = spec.n;
  ShellReport rep;

  // Unit-cube integrals of |grad v|^p, one per symmetry class of subdivision
  // sets (f outward faces subdivided, axes 1..f). The fully factorised
  // sampler keeps every level's radial tail bounded, so the standard errors
  // are trustworthy at moderate sample counts.
  SeminormOptions vopt;
  vopt.map = MapKind::v;
  vopt.sampler = Sampler::model;
  vopt.workers = workers;
  for (int f = 1; f <= n; ++f) {
    vopt.subdivided = ConeSet{};
    for (int j = 1; j <= f; ++j) vopt.subdivided.add(ConeId{j, +1});
    rep.class_unit_integrals.push_back(seminorm_mc(spec, p, samples, seed + 17 * f, vopt));
  }

  EvalRequest req;
  req.jacobian = true;
  req.stratum_tol = 1e-12;

  for (int g : generations) {
    if (g < 2) throw ValidationError("shell generations must be >= 2");
    ShellGeneration sg;
    sg.generation = g;
    const double side = std::ldexp(1.0, 2 - g);
    const double cube_vol = std::pow(side, n);
    const std::int64_t M = 3 * (std::int64_t{1} << (g - 2));

    // Representative face-class cube: first coordinate extremal positive.
    DyadicCube face_cube;
    face_cube.dim = n;
    face_cube.generation = g;
    face_cube.idx[0] = M - 1;

    // Both sides of the ratio sample with the same factorised importance
    // (independent draws); the evaluation of the left side still runs
    // through the full assembled map (its own cube lookup and face
    // classification), which is what the identity tests.
    const VecN ctr = face_cube.center();
    const double rr = 0.5 * side;
    {
      const ConeSet sigma = cube_subdivision(face_cube);
      const McAccum acc = run_mc(samples, seed + 101 * g, workers, [&](Rng& rng) {
        const Draw d = draw_cone_model(spec, n, p, rng, sigma);
        const VecN y = ctr + rr * d.x;
        const EvalResult res = eval_w(spec, VecN(y / 3.0), req);
        return std::pow(frobenius(res.jac), p) * std::exp(-d.logq) * std::pow(rr, n);
      });
      sg.cube_integral = Estimate{acc.mean, acc.se, samples, seed + 101 * g, acc.retries};
    }

    const Estimate& unit1 = rep.class_unit_integrals[0];
    sg.scaled_unit =
        Estimate{cube_vol / std::pow(2.0, n) * unit1.value, cube_vol / std::pow(2.0, n) * unit1.std_error,
                 unit1.samples, unit1.seed, unit1.retries};
    sg.ratio = sg.cube_integral.value / sg.scaled_unit.value;
    sg.ratio_se = sg.ratio * std::sqrt(std::pow(sg.cube_integral.std_error / sg.cube_integral.value, 2) +
                                       std::pow(sg.scaled_unit.std_error / sg.scaled_unit.value, 2));

    // Whole shell, directly (uniform over the shell's equal-volume cubes)...
    double ring_total_cubes = 0.0;
    for (int f = 1; f <= n; ++f)
      ring_total_cubes += static_cast<double>(ring_cube_count_by_extreme(g, n, f));
    {
      const McAccum acc = run_mc(samples, seed + 757 * g, workers, [&](Rng& rng) {
        const DyadicCube cube = draw_cube_in_generation(n, g, rng);
        const Draw d = draw_cone_model(spec, n, p, rng, cube_subdivision(cube));
        const VecN y = cube.center() + rr * d.x;
        const EvalResult res = eval_w(spec, VecN(y / 3.0), req);
        return std::pow(frobenius(res.jac), p) * std::exp(-d.logq) * std::pow(rr, n) *
               ring_total_cubes;
      });
      sg.ring_mc = Estimate{acc.mean, acc.se, samples, seed + 757 * g, acc.retries};
    }

    // ...and through the per-class counts.
    double sum = 0.0, var = 0.0;
    for (int f = 1; f <= n; ++f) {
      const double cnt = static_cast<double>(ring_cube_count_by_extreme(g, n, f));
      const double w = cnt * cube_vol / std::pow(2.0, n);
      sum += w * rep.class_unit_integrals[f - 1].value;
      var += std::pow(w * rep.class_unit_integrals[f - 1].std_error, 2);
    }
    sg.ring_counts = sum;
    sg.ring_counts_se = std::sqrt(var);
    rep.generations.push_back(sg);
  }

  // Summed shell identity over all generations, via counts. The per-class
  // breakdown matters: shells contain edge and corner cubes with several
  // subdivided cones, so the single-constant form (3^n - 1) I_1 is only an
  // idealisation (reported for comparison).
  double total = 0.0;
  for (int g = 2; g <= 220; ++g) {
    const double cube_vol = std::pow(std::ldexp(1.0, 2 - g), n);
    double term = 0.0;
    for (int f = 1; f <= n; ++f)
      term += static_cast<double>(ring_cube_count_by_extreme(g, n, f)) * cube_vol /
              std::pow(2.0, n) * rep.class_unit_integrals[f - 1].value;
    total += term;
    if (term < 1e-12 * total) break;
  }
  rep.shell_total_counts = total;
  rep.single_cone_form_total = (std::pow(3.0, n) - 1.0) * rep.class_unit_integrals[0].value;
  return rep;
}

TraceReport boundary_trace_scan(const MapSpec& spec, double eps, long samples, std::uint64_t seed,
                                int workers, std::vector<double>* sample_rows) {
  spec.validate();
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("trace scan: eps must be in (0,1)");
  if (std::ldexp(1.0, 3 - spec.k_max) >= eps)
    throw DepthExceeded("trace scan: eps below the resolution of the generation cap");

  const int n = spec.n;
  const McAccum acc = run_mc(
      samples, seed, workers,
      [&](Rng& rng) {
        const int axis = static_cast<int>(rng.below(n));
        const double sign = rng.below(2) ? 1.0 : -1.0;
        VecN x(n);
        for (int j = 0; j < n; ++j)
          x[j] = j == axis ? sign * (1.0 - eps) : (1.0 - eps) * rng.symmetric();
        return (eval_w(spec, x).value - x).norm();
      },
      sample_rows);
  return TraceReport{eps, acc.max_val, acc.mean, samples};
}

BoundaryFamily parse_family(const std::string& s) {
  if (s == "cone") return BoundaryFamily::cone;
  if (s == "quadrant") return BoundaryFamily::quadrant;
  if (s == "whitney") return BoundaryFamily::whitney;
  throw ValidationError("unknown boundary family '" + s + "' (expected cone|quadrant|whitney)");
}

std::string to_string(BoundaryFamily f) {
  switch (f) {
    case BoundaryFamily::cone: return "cone";
    case BoundaryFamily::quadrant: return "quadrant";
    case BoundaryFamily::whitney: return "whitney";
  }
  return "?";
}

namespace {

std::pair<VecN, VecN> make_straddle_pair(const MapSpec& spec, BoundaryFamily family, double delta,
                                         Rng& rng) {
  const int n = spec.n;
  switch (family) {
    case BoundaryFamily::cone: {
      // A tie between two cone axes inside a dyadic cube of moderate depth.
      VecN z(n);
      for (int j = 0; j < n; ++j) z[j] = 0.98 * rng.symmetric();
      const DyadicCube cube = locate(VecN(3.0 * z), spec.k_max);
      if (cube.generation > 6) throw OnStratum("resample: cube too deep for the scan");
      const double rr = cube.half_side();
      const int a = static_cast<int>(rng.below(n));
      int b = static_cast<int>(rng.below(n - 1));
      if (b >= a) ++b;
      VecN xi(n);
      const double ra = 0.3 + 0.55 * rng.uniform();
      const double sa = rng.below(2) ? 1.0 : -1.0;
      const double sb = rng.below(2) ? 1.0 : -1.0;
      for (int j = 0; j < n; ++j) xi[j] = 0.9 * ra * rng.symmetric();
      xi[a] = sa * ra;
      xi[b] = sb * ra;
      VecN dir = VecN::Zero(n);
      dir[b] = sb / std::sqrt(2.0);
      dir[a] = -sa / std::sqrt(2.0);
      const double step = 3.0 * delta / rr / 2.0;
      const VecN c = cube.center();
      return {VecN((c + rr * (xi + step * dir)) / 3.0), VecN((c + rr * (xi - step * dir)) / 3.0)};
    }
    case BoundaryFamily::quadrant: {
      // Straddle a quadrant plane of a subdivided face; the central cube
      // subdivides every cone.
      const double r = 0.35 + 0.55 * rng.uniform();
      const ConeId c = random_cone(n, rng);
      VecN yhat(n - 1);
      for (int j = 0; j < n - 1; ++j) yhat[j] = 0.9 * rng.symmetric();
      const int i = static_cast<int>(rng.below(n - 1));
      const double step = 3.0 * delta / r / 2.0;
      VecN yp = yhat, ym = yhat;
      yp[i] = step;
      ym[i] = -step;
      return {VecN(r * face_unchart(c, yp) / 3.0), VecN(r * face_unchart(c, ym) / 3.0)};
    }
    case BoundaryFamily::whitney: {
      // Straddle a shared dyadic cube face, including the central cube's.
      const int g = 1 + static_cast<int>(rng.below(4));
      DyadicCube cube;
      cube.dim = n;
      if (g > 1) cube = draw_cube_in_generation(n, g, rng);
      const double rr = cube.half_side();
      const VecN c = cube.center();
      const int axis = static_cast<int>(rng.below(n));
      const double sign = rng.below(2) ? 1.0 : -1.0;
      VecN facept(n);
      for (int j = 0; j < n; ++j)
        facept[j] = c[j] + (j == axis ? sign * rr : rr * 0.8 * rng.symmetric());
      VecN yp = facept, ym = facept;
      yp[axis] += 1.5 * delta;
      ym[axis] -= 1.5 * delta;
      return {VecN(yp / 3.0), VecN(ym / 3.0)};
    }
  }
  throw Error("make_straddle_pair: unreachable");
}

}  // namespace

ContinuityReport continuity_scan(const MapSpec& spec, BoundaryFamily family, double delta,
                                 long pairs, std::uint64_t seed) {
  spec.validate();
  if (spec.n == spec.k && family != BoundaryFamily::cone)
    throw ValidationError("continuity scan: only cone boundaries exist at n == k");
  if (!(delta > 0.0)) throw ValidationError("continuity scan: delta must be positive");

  ContinuityReport rep;
  rep.family = family;
  rep.delta = delta;

  EvalRequest req;
  req.jacobian = true;

  long done = 0;
  std::uint64_t stream = 0;
  const std::uint64_t stream_cap = static_cast<std::uint64_t>(pairs) * 1000;
  while (done < pairs) {
    if (++stream > stream_cap)
      throw RetryExhausted("continuity scan: could not build enough straddle pairs");
    Rng rng(seed, stream);
    try {
      auto [xp, xm] = make_straddle_pair(spec, family, delta, rng);
      const EvalResult ep = spec.n == spec.k ? eval_base(xp, req) : eval_w(spec, xp, req);
      const EvalResult em = spec.n == spec.k ? eval_base(xm, req) : eval_w(spec, xm, req);
      const double jump = (ep.value - em.value).norm();
      const double gmax = std::max({1.0, frobenius(ep.jac), frobenius(em.jac)});
      rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, jump / (delta * gmax));
      if (gmax <= 30.0) {
        rep.max_jump = std::max(rep.max_jump, jump);
        ++done;
      } else {
        ++rep.filtered;
      }
    } catch (const EvalError&) {
      continue;
    }
  }
  rep.pairs = pairs;
  return rep;
}

double Integrand::operator()(const MatN& zeta) const {
  switch (kind) {
    case Kind::frobenius_pow:
      return std::pow(zeta.norm(), expo);
    case Kind::det_pow:
      if (zeta.rows() != zeta.cols())
        throw IntegrandUnsupported("det integrand needs a square matrix");
      return std::pow(std::abs(zeta.determinant()), expo);
    case Kind::minor_det_pow: {
      const int m = minor_size;
      if (m < 1 || m > std::min(zeta.rows(), zeta.cols()))
        throw IntegrandUnsupported("minor size out of range");
      double best = 0.0;
      std::vector<int> ri(m), ci(m);
      std::function<void(int, int)> rows_loop = [&](int start, int depth) {
        if (depth == m) {
          std::function<void(int, int)> cols_loop = [&](int cstart, int cdepth) {
            if (cdepth == m) {
              MatN sub(m, m);
              for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) sub(i, j) = zeta(ri[i], ci[j]);
              best = std::max(best, std::abs(sub.determinant()));
              return;
            }
            for (int cc = cstart; cc < zeta.cols(); ++cc) {
              ci[cdepth] = cc;
              cols_loop(cc + 1, cdepth + 1);
            }
          };
          cols_loop(0, 0);
          return;
        }
        for (int rr = start; rr < zeta.rows(); ++rr) {
          ri[depth] = rr;
          rows_loop(rr + 1, depth + 1);
        }
      };
      rows_loop(0, 0);
      return std::pow(best, expo);
    }
  }
  throw Error("integrand: unreachable");
}

double Integrand::growth_order(int n) const {
  switch (kind) {
    case Kind::frobenius_pow: return expo;
    case Kind::det_pow: return expo * n;
    case Kind::minor_det_pow: return expo * minor_size;
  }
  return expo;
}

std::string Integrand::name() const {
  switch (kind) {
    case Kind::frobenius_pow: return "frobenius^" + std::to_string(expo);
    case Kind::det_pow: return "|det|^" + std::to_string(expo);
    case Kind::minor_det_pow:
      return "max|minor_" + std::to_string(minor_size) + "|^" + std::to_string(expo);
  }
  return "?";
}

Integrand Integrand::parse(const std::string& tag, double expo, int minor_size) {
  Integrand f;
  f.expo = expo;
  f.minor_size = minor_size;
  if (tag == "fro" || tag == "frobenius")
    f.kind = Kind::frobenius_pow;
  else if (tag == "det")
    f.kind = Kind::det_pow;
  else if (tag == "minor")
    f.kind = Kind::minor_det_pow;
  else
    throw IntegrandUnsupported("unknown integrand '" + tag + "' (expected fro|det|minor)");
  if (expo <= 0.0) throw IntegrandUnsupported("integrand exponent must be positive");
  return f;
}

GrowthReport growth_certificate(const MapSpec& spec, const MatN& xi, const Integrand& f,
                                long samples, std::uint64_t seed, int workers) {
  spec.validate();
  if (xi.cols() != spec.n) throw ValidationError("growth certificate: xi must have n columns");
  if (f.kind == Integrand::Kind::det_pow && xi.rows() != xi.cols())
    throw IntegrandUnsupported("det integrand needs square xi (N = n)");

  EvalRequest req;
  req.jacobian = true;
  req.stratum_tol = 1e-12;

  const McAccum acc = run_mc(samples, seed, workers, [&](Rng& rng) {
    const Draw dr = draw_uniform(spec.n, rng);
    const EvalResult res = eval_w(spec, dr.x, req);
    return f(MatN(xi * res.jac)) * std::exp(-dr.logq);
  });

  GrowthReport rep;
  rep.xi = xi;
  rep.q = f.growth_order(spec.n);
  rep.total = acc.mean;
  rep.total_se = acc.se;
  const double vol = std::pow(2.0, spec.n);
  rep.mean = Estimate{acc.mean / vol, acc.se / vol, samples, seed, acc.retries};
  rep.lower = f(xi);
  const double xin = xi.norm();
  rep.l_prime = rep.total / (1.0 + std::pow(xin, rep.q));
  rep.scale_free = xin > 0.0 ? rep.total / std::pow(xin, rep.q) : 0.0;
  rep.lower_bound_ok = rep.mean.value + 3.0 * rep.mean.std_error >= rep.lower;
  return rep;
}

DetScanReport det_vanishing_scan(const MapSpec& spec, const MatN& xi, long samples,
                                 std::uint64_t seed, int workers) {
  spec.validate();
  if (xi.cols() != spec.n) throw ValidationError("det scan: xi must have n columns");
  const int msz = static_cast<int>(std::min(xi.rows(), static_cast<Eigen::Index>(spec.n)));
  if (msz < 2) throw ValidationError("det scan: need minors of size >= 2");

  EvalRequest req;
  req.jacobian = true;
  req.stratum_tol = 1e-12;

  DetScanReport rep;
  rep.samples = samples;
  std::vector<std::vector<std::vector<int>>> row_combos(msz + 1), col_combos(msz + 1);
  for (int m = 2; m <= msz; ++m) {
    std::vector<int> cur;
    std::function<void(int, int, int, std::vector<std::vector<int>>&)> gen =
        [&](int start, int depth, int total, std::vector<std::vector<int>>& out) {
          if (depth == m) {
            out.push_back(cur);
            return;
          }
          for (int i = start; i < total; ++i) {
            cur.push_back(i);
            gen(i + 1, depth + 1, total, out);
            cur.pop_back();
          }
        };
    gen(0, 0, static_cast<int>(xi.rows()), row_combos[m]);
    gen(0, 0, spec.n, col_combos[m]);
  }

  std::vector<McAccum> acc(msz + 1);
  for (int m = 2; m <= msz; ++m) {
    acc[m] = run_mc(samples, seed, workers, [&, m](Rng& rng) {
      const Draw dr = draw_uniform(spec.n, rng);
      const EvalResult res = eval_w(spec, dr.x, req);
      const MatN zeta = xi * res.jac;
      double worst = 0.0;
      MatN sub(m, m);
      for (const auto& rs : row_combos[m])
        for (const auto& cs : col_combos[m]) {
          double hadamard = 1.0;
          for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) sub(i, j) = zeta(rs[i], cs[j]);
          }
          for (int i = 0; i < m; ++i) hadamard *= sub.row(i).norm();
          const double d = std::abs(sub.determinant());
          worst = std::max(worst, d / std::max(hadamard, 1e-300));
        }
      return worst;
    });
    rep.by_size.push_back(DetScanEntry{m, acc[m].max_val});
  }
  return rep;
}

}  // namespace framemap

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "framemap/frame_map.hpp"
#include "framemap/vec.hpp"

namespace framemap {

/// Monte-Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  long samples = 0;
  std::uint64_t seed = 0;
  long retries = 0;  // stratum-hit resamples
};

enum class Sampler {
  automatic,  // uniform below p = 1.5, radial from there on
  uniform,
  radial,  // cone + radial importance at the outermost level; cancels the leading r^-p
  model    // importance sampling from the radially factorised gradient model, every level
};

Sampler parse_sampler(const std::string& s);

/// Closed form for the L^p gradient integral of the radially factorised
/// model over (-1,1)^n: the base-map seminorm at dimension k (radial factor
/// 1/(k-p) times the face integral) times prod_{d=k+1..n} 2d/(d-p), one
/// factor of 2d/(d-p) per cone level. Coincides with the seminorm of the
/// exact maps wherever the inner face maps are 0-homogeneous (n <= k+1 for u).
/// Throws ExponentOutOfRange unless 1 <= p < k: the radial integral
/// int_0^1 r^(k-1-p) dr diverges at p = k.
double seminorm_recursive(int n, int k, double p);

struct SeminormOptions {
  MapKind map = MapKind::u;
  GradModel model = GradModel::exact;
  Sampler sampler = Sampler::automatic;
  ConeSet subdivided{};  // for map == v
  int workers = 1;
  std::vector<double>* sample_rows = nullptr;  // per-sample weighted values (forces 1 worker)
};

/// Monte-Carlo estimate of int_{(-1,1)^n} |grad(map)|_F^p dx. Points hitting
/// a stratum are resampled (cap 100 per sample).
Estimate seminorm_mc(const MapSpec& spec, double p, long samples, std::uint64_t seed,
                     const SeminormOptions& opt = {});

/// Scale identity per dyadic cube and per shell.
struct ShellGeneration {
  int generation = 0;
  Estimate cube_integral;  // int over a representative face-class cube of |grad w_D|^p
  Estimate scaled_unit;    // 2^-n L(Q) int_{(-1,1)^n} |grad v_sigma|^p, matching sigma
  double ratio = 0.0;
  double ratio_se = 0.0;
  Estimate ring_mc;        // direct MC over the whole shell
  double ring_counts = 0.0;  // per-class counts x scaled unit integrals
  double ring_counts_se = 0.0;
};

struct ShellReport {
  std::vector<ShellGeneration> generations;
  std::vector<Estimate> class_unit_integrals;  // index f-1: v with f subdivided cones
  double shell_total_counts = 0.0;   // sum over all generations via counts
  double single_cone_form_total = 0.0;     // (3^n - 1) x single-cone unit integral
};

ShellReport shell_identity_check(const MapSpec& spec, double p, long samples, std::uint64_t seed,
                                 const std::vector<int>& generations, int workers = 1);

struct TraceReport {
  double eps = 0.0;
  double max_dev = 0.0;
  double mean_dev = 0.0;
  long samples = 0;
};

/// Max Euclidean deviation |w(x)-x| over points at inf-distance eps from the
/// cube boundary. Contract: <= 8 sqrt(n) eps. `sample_rows` collects the
/// per-sample deviations (forces one worker).
TraceReport boundary_trace_scan(const MapSpec& spec, double eps, long samples, std::uint64_t seed,
                                int workers = 1, std::vector<double>* sample_rows = nullptr);

enum class BoundaryFamily { cone, quadrant, whitney };

BoundaryFamily parse_family(const std::string& s);
std::string to_string(BoundaryFamily f);

struct ContinuityReport {
  BoundaryFamily family;
  double delta = 0.0;
  long pairs = 0;
  /// Max jump over pairs whose endpoint gradients are moderate (|J|_F <= 30);
  /// for these the local Lipschitz bound keeps jumps well under any
  /// discontinuity scale.
  double max_jump = 0.0;
  /// Max of jump / (delta * max(1, |J^+|_F, |J^-|_F)) over all pairs, no
  /// filtering. A genuine discontinuity of size c would push this to
  /// ~c/delta; continuity keeps it O(1).
  double max_lipschitz_ratio = 0.0;
  long filtered = 0;  // pairs redrawn by the moderate-gradient filter
};

/// Evaluate the assembled map on point pairs straddling a boundary of the
/// given family at Euclidean gap delta.
ContinuityReport continuity_scan(const MapSpec& spec, BoundaryFamily family, double delta,
                                 long pairs, std::uint64_t seed);

struct Integrand {
  enum class Kind { frobenius_pow, det_pow, minor_det_pow };
  Kind kind = Kind::frobenius_pow;
  double expo = 1.0;    // q or alpha
  int minor_size = 2;   // for minor_det_pow

  double operator()(const MatN& zeta) const;
  /// Growth order along rays: f(t zeta) ~ t^growth_order.
  double growth_order(int n) const;
  std::string name() const;
  static Integrand parse(const std::string& tag, double expo, int minor_size);
};

struct GrowthReport {
  MatN xi;
  double q = 1.0;           // growth order used in the certificate denominator
  Estimate mean;            // average of f(xi grad w) over the cube
  double total = 0.0;       // integral (mean x 2^n)
  double total_se = 0.0;
  double lower = 0.0;       // f(xi)
  double l_prime = 0.0;     // total / (1 + |xi|_F^q)
  double scale_free = 0.0;  // total / |xi|_F^q (0 for xi = 0); exactly ray-invariant for f = | . |
  bool lower_bound_ok = false;  // mean + 3 se >= f(xi)
};

/// Certificate data for the growth transfer: the average of f(xi grad w)
/// bounds f(xi) from above exactly when the inequality survives the
/// collapse, and the implied constant L' stays bounded along rays.
GrowthReport growth_certificate(const MapSpec& spec, const MatN& xi, const Integrand& f,
                                long samples, std::uint64_t seed, int workers = 1);

struct DetScanEntry {
  int minor_size = 0;
  double max_rel = 0.0;  // max |det(minor)| / Hadamard row bound
};

struct DetScanReport {
  std::vector<DetScanEntry> by_size;
  long samples = 0;
};

/// Max relative determinant of every m x m minor of xi grad w over sampled
/// points. Minors of size >= k vanish to rounding.
DetScanReport det_vanishing_scan(const MapSpec& spec, const MatN& xi, long samples,
                                 std::uint64_t seed, int workers = 1);

}  // namespace framemap

#include "sgld/loss_models.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sgld/errors.hpp"
#include "sgld/quadrature.hpp"
#include "sgld/random.hpp"

namespace sgld {

namespace {

double dot(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

double norm2(const double* a, std::size_t d) { return dot(a, a, d); }

// Smoothed double well profile: quartic on |u| <= W, quadratic tail beyond.
struct Well {
  double W;
  double kappa() const { return 3 * W * W - 1; }
  double q_in(double u) const { return 0.25 * (u * u - 1) * (u * u - 1); }
  double value(double u) const {
    const double a = std::abs(u);
    if (a <= W) return q_in(u);
    const double e = a - W;
    return q_in(W) + (W * W * W - W) * e + 0.5 * kappa() * e * e;
  }
  double slope(double u) const {
    const double a = std::abs(u);
    if (a <= W) return u * u * u - u;
    const double s = u > 0 ? 1.0 : -1.0;
    return s * ((W * W * W - W) + kappa() * (a - W));
  }
};

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// E cos<z, w> for z uniform in the ball of radius a in R^d.
double ball_cos_mean(double a, double r, std::size_t d) {
  const double x = a * r;
  if (x == 0.0) return 1.0;
  if (d == 1) return sinc(x);
  const double nu = 0.5 * static_cast<double>(d);
  if (x < 1e-6) return 1.0 - x * x / (2.0 * (static_cast<double>(d) + 2.0));
  return std::tgamma(nu + 1) * std::pow(2.0 / x, nu) * std::cyl_bessel_j(nu, x);
}

}  // namespace

std::string_view to_string(LossFamily family) {
  switch (family) {
    case LossFamily::QuadraticData: return "quadratic-data";
    case LossFamily::Ripple: return "ripple";
    case LossFamily::SmoothedDoubleWell: return "smoothed-double-well";
  }
  return "unknown";
}

std::string_view to_string(DataKind kind) {
  switch (kind) {
    case DataKind::UniformBall: return "uniform-ball";
    case DataKind::UniformCube: return "uniform-cube";
    case DataKind::PointMass: return "point-mass";
  }
  return "unknown";
}

LossFamily parse_loss_family(std::string_view name) {
  for (auto f : {LossFamily::QuadraticData, LossFamily::Ripple, LossFamily::SmoothedDoubleWell}) {
    if (to_string(f) == name) return f;
  }
  throw UsageError("unknown loss family '" + std::string(name) + "'");
}

DataKind parse_data_kind(std::string_view name) {
  for (auto k : {DataKind::UniformBall, DataKind::UniformCube, DataKind::PointMass}) {
    if (to_string(k) == name) return k;
  }
  throw UsageError("unknown data distribution '" + std::string(name) + "'");
}

double DataDistribution::z_max(std::size_t d) const {
  switch (kind) {
    case DataKind::UniformBall: return scale;
    case DataKind::UniformCube: return scale * std::sqrt(static_cast<double>(d));
    case DataKind::PointMass: return std::sqrt(norm2(point.data(), point.size()));
  }
  return 0.0;
}

SampleSet SampleSet::from_points(std::size_t d, std::vector<double> flat, std::string provenance) {
  if (d == 0 || flat.empty() || flat.size() % d != 0) {
    throw UsageError("sample set needs a non-empty n x d array");
  }
  SampleSet s;
  s.d = d;
  s.n = flat.size() / d;
  s.points = std::move(flat);
  s.provenance = std::move(provenance);
  return s;
}

LossModel::LossModel(LossFamily family, std::size_t d, std::vector<double> params, DataDistribution dist)
    : family_(family), d_(d), params_(std::move(params)), dist_(std::move(dist)) {
  if (d_ == 0) throw UsageError("dimension must be positive");
  if (dist_.kind == DataKind::PointMass) {
    if (dist_.point.size() != d_) throw UsageError("point-mass location has wrong dimension");
  } else if (!(dist_.scale > 0.0)) {
    throw UsageError("data distribution scale must be positive");
  }
  const double Z = z_max();
  switch (family_) {
    case LossFamily::QuadraticData:
      constants_ = {0.5, 0.5 * Z * Z, 1.0, Z, 0.5 * Z * Z};
      break;
    case LossFamily::Ripple: {
      const double mu = params_[0], eps = params_[1];
      if (!(mu > 0.0) || !(eps >= 0.0)) throw UsageError("ripple needs mu > 0 and eps >= 0");
      constants_ = {mu / 2, eps * eps * Z * Z / (2 * mu), mu + eps * Z * Z, 0.0, 0.0};
      break;
    }
    case LossFamily::SmoothedDoubleWell: {
      const double W = params_[0];
      if (d_ != 1) throw UsageError("smoothed-double-well is one-dimensional");
      if (!(W >= 1.5)) throw UsageError("smoothed-double-well needs W_cut >= 1.5");
      if (Z > 1.0) throw UsageError("smoothed-double-well declared constants need Z_max <= 1");
      const double inv = 1.0 / std::sqrt(3.0);
      const double A = Z >= inv ? std::max(2.0 / (3.0 * std::sqrt(3.0)), Z * Z * Z - Z) : Z - Z * Z * Z;
      constants_ = {1.0, (1 + Z) * (1 + Z), 3 * W * W - 1, std::abs(A), 0.25};
      break;
    }
  }
}

LossModel LossModel::quadratic_data(std::size_t d, DataDistribution dist) {
  return LossModel(LossFamily::QuadraticData, d, {}, std::move(dist));
}

LossModel LossModel::ripple(std::size_t d, double mu, double eps, DataDistribution dist) {
  return LossModel(LossFamily::Ripple, d, {mu, eps}, std::move(dist));
}

LossModel LossModel::smoothed_double_well(double w_cut, DataDistribution dist) {
  return LossModel(LossFamily::SmoothedDoubleWell, 1, {w_cut}, std::move(dist));
}

LossModel LossModel::with_constants(RegularityConstants c) const {
  LossModel copy = *this;
  copy.constants_ = c;
  return copy;
}

std::string LossModel::describe() const {
  std::ostringstream os;
  os << to_string(family_) << "(d=" << d_;
  if (family_ == LossFamily::Ripple) os << ", mu=" << params_[0] << ", eps=" << params_[1];
  if (family_ == LossFamily::SmoothedDoubleWell) os << ", W_cut=" << params_[0];
  os << ", data=" << to_string(dist_.kind);
  if (dist_.kind != DataKind::PointMass) os << "(" << dist_.scale << ")";
  os << ")";
  return os.str();
}

void LossModel::check_dim(std::span<const double> v, const char* what) const {
  if (v.size() != d_) {
    std::ostringstream os;
    os << what << " has dimension " << v.size() << ", model expects " << d_;
    throw UsageError(os.str());
  }
}

double LossModel::loss_unchecked(const double* w, const double* z) const {
  switch (family_) {
    case LossFamily::QuadraticData: {
      double s = 0.0;
      for (std::size_t i = 0; i < d_; ++i) s += (w[i] - z[i]) * (w[i] - z[i]);
      return 0.5 * s;
    }
    case LossFamily::Ripple:
      return 0.5 * params_[0] * norm2(w, d_) + params_[1] * (1.0 - std::cos(dot(z, w, d_)));
    case LossFamily::SmoothedDoubleWell:
      return Well{params_[0]}.value(w[0] - z[0]);
  }
  return 0.0;
}

void LossModel::grad_accumulate(const double* w, const double* z, double weight, double* out) const {
  switch (family_) {
    case LossFamily::QuadraticData:
      for (std::size_t i = 0; i < d_; ++i) out[i] += weight * (w[i] - z[i]);
      return;
    case LossFamily::Ripple: {
      const double s = weight * params_[1] * std::sin(dot(z, w, d_));
      for (std::size_t i = 0; i < d_; ++i) out[i] += weight * params_[0] * w[i] + s * z[i];
      return;
    }
    case LossFamily::SmoothedDoubleWell:
      out[0] += weight * Well{params_[0]}.slope(w[0] - z[0]);
      return;
  }
}

double LossModel::loss(std::span<const double> w, std::span<const double> z) const {
  check_dim(w, "w");
  check_dim(z, "z");
  return loss_unchecked(w.data(), z.data());
}

void LossModel::grad(std::span<const double> w, std::span<const double> z, std::span<double> out) const {
  check_dim(w, "w");
  check_dim(z, "z");
  if (out.size() != d_) throw UsageError("gradient output has wrong dimension");
  std::fill(out.begin(), out.end(), 0.0);
  grad_accumulate(w.data(), z.data(), 1.0, out.data());
}

double LossModel::expected_loss(std::span<const double> w) const {
  check_dim(w, "w");
  const double a = dist_.scale;
  const double dd = static_cast<double>(d_);
  if (dist_.kind == DataKind::PointMass) return loss_unchecked(w.data(), dist_.point.data());
  switch (family_) {
    case LossFamily::QuadraticData: {
      // Both supports are centred, so E z = 0.
      const double ez2 = dist_.kind == DataKind::UniformBall ? dd * a * a / (dd + 2) : dd * a * a / 3;
      return 0.5 * norm2(w.data(), d_) + 0.5 * ez2;
    }
    case LossFamily::Ripple: {
      double ecos = 1.0;
      if (dist_.kind == DataKind::UniformBall) {
        ecos = ball_cos_mean(a, std::sqrt(norm2(w.data(), d_)), d_);
      } else {
        for (std::size_t i = 0; i < d_; ++i) ecos *= sinc(a * w[i]);
      }
      return 0.5 * params_[0] * norm2(w.data(), d_) + params_[1] * (1.0 - ecos);
    }
    case LossFamily::SmoothedDoubleWell:
      return expected_loss_by_quadrature(w);
  }
  return 0.0;
}

double LossModel::expected_loss_by_quadrature(std::span<const double> w) const {
  check_dim(w, "w");
  if (dist_.kind == DataKind::PointMass) return loss_unchecked(w.data(), dist_.point.data());
  if (d_ > 2) throw UsageError("expected_loss_by_quadrature supports d <= 2");
  const double a = dist_.scale;
  constexpr double kRel = 1e-12, kAbs = 1e-10;
  if (d_ == 1) {
    auto f = [&](double z) { return loss_unchecked(w.data(), &z); };
    // Split at the double-well seams, where the profile is only C^2.
    std::vector<double> cuts{-a, a};
    if (family_ == LossFamily::SmoothedDoubleWell) {
      for (double c : {w[0] - params_[0], w[0] + params_[0]}) {
        if (c > -a && c < a) cuts.push_back(c);
      }
      std::sort(cuts.begin(), cuts.end());
    }
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      total += integrate(f, cuts[i], cuts[i + 1], kRel, kAbs, "expected loss").value;
    }
    return total / (2 * a);
  }
  if (dist_.kind == DataKind::UniformCube) {
    auto outer = [&](double z0) {
      auto inner = [&](double z1) {
        const double z[2] = {z0, z1};
        return loss_unchecked(w.data(), z);
      };
      return integrate(inner, -a, a, kRel, kAbs, "expected loss (inner)").value;
    };
    return integrate(outer, -a, a, kRel, kAbs, "expected loss (outer)").value / (4 * a * a);
  }
  auto outer = [&](double r) {
    auto inner = [&](double th) {
      const double z[2] = {r * std::cos(th), r * std::sin(th)};
      return loss_unchecked(w.data(), z);
    };
    return r * integrate(inner, 0.0, 2 * std::numbers::pi, kRel, kAbs, "expected loss (angle)").value;
  };
  return integrate(outer, 0.0, a, kRel, kAbs, "expected loss (radius)").value / (std::numbers::pi * a * a);
}

double LossModel::min_expected_loss() const {
  const double a = dist_.scale;
  const double dd = static_cast<double>(d_);
  if (dist_.kind == DataKind::PointMass && family_ != LossFamily::Ripple) return 0.0;
  switch (family_) {
    case LossFamily::QuadraticData:
      return dist_.kind == DataKind::UniformBall ? 0.5 * dd * a * a / (dd + 2) : dd * a * a / 6;
    case LossFamily::Ripple:
      return 0.0;
    case LossFamily::SmoothedDoubleWell: {
      // Scan then Brent-polish; L is smooth and one-dimensional.
      const double span = params_[0] + z_max();
      constexpr int kScan = 2001;
      double best_w = 0.0, best = expected_loss(std::span<const double>(&best_w, 1));
      for (int i = 0; i < kScan; ++i) {
        double w = -span + 2 * span * i / (kScan - 1);
        const double v = expected_loss(std::span<const double>(&w, 1));
        if (v < best) best = v, best_w = w;
      }
      const double step = 2 * span / (kScan - 1);
      auto f = [&](double w) { return expected_loss(std::span<const double>(&w, 1)); };
      auto r = boost::math::tools::brent_find_minima(f, best_w - step, best_w + step, 52);
      return std::min(best, r.second);
    }
  }
  return 0.0;
}

SampleSet draw_sample_set(const LossModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw UsageError("sample size must be >= 1");
  const std::size_t d = model.dimension();
  const DataDistribution& dist = model.distribution();
  GaussianSource rng(seed);
  std::vector<double> flat(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    double* z = flat.data() + i * d;
    switch (dist.kind) {
      case DataKind::PointMass:
        std::copy(dist.point.begin(), dist.point.end(), z);
        break;
      case DataKind::UniformCube:
        for (std::size_t j = 0; j < d; ++j) z[j] = dist.scale * (2 * rng.uniform() - 1);
        break;
      case DataKind::UniformBall: {
        double r2 = 0.0;
        do {
          for (std::size_t j = 0; j < d; ++j) z[j] = rng.next();
          r2 = norm2(z, d);
        } while (r2 == 0.0);
        const double radius = dist.scale * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
        const double k = radius / std::sqrt(r2);
        for (std::size_t j = 0; j < d; ++j) z[j] *= k;
        break;
      }
    }
  }
  SampleSet s = SampleSet::from_points(d, std::move(flat), std::string(to_string(dist.kind)));
  s.seed = seed;
  return s;
}

void validate_sample(const LossModel& model, const SampleSet& S) {
  if (S.n == 0) throw UsageError("empty sample set");
  if (S.d != model.dimension()) throw UsageError("sample dimension does not match model");
  const double zmax = model.z_max() * (1 + 1e-12);
  for (std::size_t i = 0; i < S.n; ++i) {
    if (std::sqrt(norm2(S.point(i).data(), S.d)) > zmax) {
      throw UsageError("sample point " + std::to_string(i) + " lies outside the data ball");
    }
  }
}

double empirical_loss(const LossModel& model, std::span<const double> w, const SampleSet& S) {
  if (S.n == 0) throw UsageError("empty sample set");
  if (w.size() != model.dimension() || S.d != model.dimension()) throw UsageError("dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < S.n; ++i) s += model.loss_unchecked(w.data(), S.points.data() + i * S.d);
  return s / static_cast<double>(S.n);
}

void empirical_grad(const LossModel& model, std::span<const double> w, const SampleSet& S,
                    std::span<double> out) {
  if (S.n == 0) throw UsageError("empty sample set");
  if (w.size() != model.dimension() || S.d != model.dimension() || out.size() != w.size()) {
    throw UsageError("dimension mismatch");
  }
  std::fill(out.begin(), out.end(), 0.0);
  const double weight = 1.0 / static_cast<double>(S.n);
  for (std::size_t i = 0; i < S.n; ++i) {
    model.grad_accumulate(w.data(), S.points.data() + i * S.d, weight, out.data());
  }
}

std::vector<double> empirical_grad(const LossModel& model, std::span<const double> w, const SampleSet& S) {
  std::vector<double> g(w.size());
  empirical_grad(model, w, S, g);
  return g;
}

namespace {

struct Prober {
  const LossModel& model;
  GaussianSource rng;
  std::size_t d;

  // Uniform in the ball of radius 100 half the time, otherwise a random
  // direction at log-uniform radius in [1e-3, 100].
  std::vector<double> parameter() {
    std::vector<double> w(d);
    double r2 = 0.0;
    do {
      for (double& v : w) v = rng.next();
      r2 = norm2(w.data(), d);
    } while (r2 == 0.0);
    const double radius = rng.uniform() < 0.5
                              ? 100.0 * std::pow(rng.uniform(), 1.0 / static_cast<double>(d))
                              : std::exp(std::log(1e-3) + rng.uniform() * std::log(1e5));
    const double k = radius / std::sqrt(r2);
    for (double& v : w) v *= k;
    return w;
  }

  // Uniform in the data ball, or on its boundary sphere.
  std::vector<double> data_point() {
    const auto& dist = model.distribution();
    if (dist.kind == DataKind::PointMass) return dist.point;
    std::vector<double> z(d);
    if (dist.kind == DataKind::UniformCube) {
      const bool corner = rng.uniform() < 0.3;
      for (double& v : z) v = corner ? (rng.uniform() < 0.5 ? -dist.scale : dist.scale)
                                     : dist.scale * (2 * rng.uniform() - 1);
      return z;
    }
    double r2 = 0.0;
    do {
      for (double& v : z) v = rng.next();
      r2 = norm2(z.data(), d);
    } while (r2 == 0.0);
    const double radius = rng.uniform() < 0.3
                              ? dist.scale
                              : dist.scale * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    const double k = radius / std::sqrt(r2);
    for (double& v : z) v *= k;
    return z;
  }
};

bool violates(double lhs, double rhs, double tol) {
  return lhs - rhs > tol * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

}  // namespace

RegularityReport verify_regularity(const LossModel& model, std::size_t probe_count, std::uint64_t seed) {
  if (probe_count == 0) throw UsageError("probe count must be >= 1");
  constexpr double kTol = 1e-9;
  const std::size_t d = model.dimension();
  const RegularityConstants& c = model.constants();
  Prober p{model, GaussianSource(seed), d};
  RegularityReport rep;
  rep.probes = probe_count;
  rep.m_emp = std::numeric_limits<double>::infinity();
  auto fail = [&](const std::string& what) {
    ++rep.violations;
    if (rep.first_violation.empty()) rep.first_violation = what;
  };
  std::vector<double> zero(d, 0.0), g(d), gv(d);
  for (std::size_t k = 0; k < probe_count; ++k) {
    const auto w = p.parameter();
    const auto v = p.parameter();
    const auto z = p.data_point();

    const double l = model.loss(w, z);
    if (l < 0.0) fail("negative loss");

    const double l0 = model.loss(zero, z);
    model.grad(zero, z, g);
    const double a0 = std::sqrt(norm2(g.data(), d));
    rep.B_emp = std::max(rep.B_emp, std::abs(l0));
    rep.A_emp = std::max(rep.A_emp, a0);
    if (violates(std::abs(l0), c.B, kTol)) fail("|l(0;z)| exceeds B");
    if (violates(a0, c.A, kTol)) fail("|grad l(0;z)| exceeds A");

    model.grad(w, z, g);
    const double w2 = norm2(w.data(), d);
    const double inner = dot(g.data(), w.data(), d);
    rep.b_emp = std::max(rep.b_emp, c.m * w2 - inner);
    rep.m_emp = std::min(rep.m_emp, (inner + c.b) / w2);
    if (violates(c.m * w2 - c.b, inner, kTol)) {
      std::ostringstream os;
      os << "dissipativity violated at |w|=" << std::sqrt(w2) << ": <grad,w>=" << inner
         << " < m|w|^2-b=" << c.m * w2 - c.b;
      fail(os.str());
    }

    model.grad(v, z, gv);
    double dg = 0.0, dw = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      dg += (g[i] - gv[i]) * (g[i] - gv[i]);
      dw += (w[i] - v[i]) * (w[i] - v[i]);
    }
    if (dw > 0.0) {
      rep.M_emp = std::max(rep.M_emp, std::sqrt(dg / dw));
      if (violates(std::sqrt(dg), c.M * std::sqrt(dw), kTol)) fail("smoothness violated");
    }
  }
  rep.pass = rep.violations == 0;
  return rep;
}

SandwichReport check_dissipative_sandwich(const LossModel& model, const SampleSet& S,
                                          std::size_t probes, std::uint64_t seed, double tolerance) {
  validate_sample(model, S);
  const std::size_t d = model.dimension();
  const RegularityConstants& c = model.constants();
  Prober p{model, GaussianSource(seed), d};
  std::vector<double> zero(d, 0.0);
  const double F0 = empirical_loss(model, zero, S);
  const auto g0 = empirical_grad(model, zero, S);
  const double g0sq = norm2(g0.data(), d);

  SandwichReport rep;
  rep.probes = probes;
  rep.min_lower_margin = rep.min_upper_margin = std::numeric_limits<double>::infinity();
  std::vector<double> cx(d);
  for (std::size_t k = 0; k < probes; ++k) {
    const auto x = p.parameter();
    double cc = p.rng.uniform();
    if (cc == 0.0) cc = 0.5;
    for (std::size_t i = 0; i < d; ++i) cx[i] = cc * x[i];
    const double x2 = norm2(x.data(), d);
    const double Fx = empirical_loss(model, x, S);
    const double lower = empirical_loss(model, cx, S) + 0.5 * (1 - cc * cc) * c.m * x2 + c.b * std::log(cc);
    const double upper = F0 + 0.5 * g0sq + 0.5 * (c.M + 1) * x2;
    rep.min_lower_margin = std::min(rep.min_lower_margin, (Fx - lower) / std::max({1.0, std::abs(Fx), std::abs(lower)}));
    rep.min_upper_margin = std::min(rep.min_upper_margin, (upper - Fx) / std::max({1.0, std::abs(Fx), std::abs(upper)}));
  }
  rep.pass = rep.min_lower_margin >= -tolerance && rep.min_upper_margin >= -tolerance;
  return rep;
}

}  // namespace sgld

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bbvp/domain.hpp"

namespace bbvp {

using ForceFn = std::function<Vec(double t, const Vec& x)>;
using BoundFn = std::function<double(double t)>;

/// Right-hand side f(t, x) of the billiard equation together with an
/// integrable bound m(t) >= ||f(t, x)|| and its integral over [0, T].
///
/// Evaluators must be reentrant: branch solves share one field across
/// threads.
class ForceField {
 public:
  /// Constant bound m(t) = bound; the integral is T * bound.
  ForceField(int dim, double horizon, ForceFn eval, double bound);

  /// General bound profile. The integral treats m as piecewise constant on
  /// `intervals` uniform cells, taking the larger endpoint value per cell.
  ForceField(int dim, double horizon, ForceFn eval, BoundFn bound,
             int intervals);

  Vec operator()(double t, const Vec& x) const { return eval_(t, x); }
  double bound(double t) const { return bound_(t); }
  double bound_integral() const { return bound_integral_; }
  double horizon() const { return horizon_; }
  int dim() const { return dim_; }

  /// f~(t, x) = f(t, x + shift); same bound.
  ForceField shifted(const Vec& shift) const;

 private:
  int dim_;
  double horizon_;
  ForceFn eval_;
  BoundFn bound_;
  double bound_integral_;
};

ForceField zero_field(int dim, double horizon);
ForceField constant_field(const Vec& value, double horizon);

/// Periodic extension f*_i(t, z) = theta_i(z_i) f_i(t, fold(z)).
/// `domain` must be origin-anchored.
Vec extend_f_star(const ForceField& field, const BoxDomain& domain, double t,
                  const Vec& z);

/// Ramp eta^i_m on [0, c_i]: rises linearly over c_i / 2m at each end.
double eta(const BoxDomain& domain, int i, double s, int m);

/// Regularized extension g*_m(t, z)_i = eta^i_m(z_i mod c_i) f*_i(t, z).
Vec g_star(const ForceField& field, const BoxDomain& domain, double t,
           const Vec& z, int m);

/// g*_m evaluated with each coordinate pinned to a known cell, which gives
/// one-sided limits at grid lines. `m` empty means the unregularized f*.
Vec g_star_in_cells(const ForceField& field, const BoxDomain& domain,
                    double t, const Vec& z, const std::vector<long>& cells,
                    std::optional<int> m);

/// Height profile of an uneven table and the gravity constant.
struct PotentialTable {
  std::function<double(double, double)> height;
  /// Analytic gradient; central differences are used when empty.
  std::function<Eigen::Vector2d(double, double)> gradient;
  double g = 9.81;
};

/// V(x, y) = x y exp(-x^2 - y^2).
PotentialTable gaussian_dimple(double g = 9.81);

Eigen::Vector2d table_gradient(const PotentialTable& table, double x,
                               double y);

/// Horizontal force on a frictionless ball: -g grad V / (|grad V|^2 + 1).
Eigen::Vector2d table_acceleration(const PotentialTable& table, double x,
                                   double y);

/// Sampled bound constant: 1.05 x the max of |f| over a 512 x 512 grid on
/// the box, capped by g/2 (|u| / (u^2 + 1) <= 1/2).
double table_bound_constant(const PotentialTable& table,
                            const BoxDomain& box);

/// Table force on `box` (original coordinates). When `bound` is given it
/// is used as the constant bound instead of the sampled one.
ForceField table_force(const PotentialTable& table, const BoxDomain& box,
                       double horizon, std::optional<double> bound = {});

struct BoundAudit {
  int samples = 0;
  /// max over samples of ||f(t,x)|| - m(t); negative means slack.
  double max_excess = 0.0;
  double min_slack = 0.0;
  bool pass = true;
};

/// Checks ||f|| <= m on a Halton sequence over [0,T] x box.
/// Throws ErrorKind::BoundViolation when a sample exceeds the bound by
/// more than 1e-12.
BoundAudit audit_bound(const ForceField& field, const BoxDomain& box,
                       int samples);

/// Named field factories used by the config file.
struct FieldSpec {
  std::string name = "zero";
  std::map<std::string, std::string> params;
  std::optional<double> bound;
};

class FieldRegistry {
 public:
  using Factory = std::function<ForceField(const FieldSpec&,
                                           const BoxDomain& box, double T)>;

  /// Registry pre-populated with "zero", "constant" and
  /// "table:gaussian-dimple". Thread-compatible, not thread-safe for
  /// concurrent registration.
  static FieldRegistry& global();

  void add(const std::string& name, Factory factory);
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Builds the field in original (un-normalized) box coordinates.
  /// "custom" dispatches to the factory named by params["custom"].
  ForceField make(const FieldSpec& spec, const BoxDomain& box,
                  double T) const;

 private:
  std::map<std::string, Factory> factories_;
};

}  // namespace bbvp

#include "bbvp/forces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bbvp/error.hpp"
#include "bbvp/text.hpp"

namespace bbvp {

ForceField::ForceField(int dim, double horizon, ForceFn eval, double bound)
    : dim_(dim),
      horizon_(horizon),
      eval_(std::move(eval)),
      bound_([bound](double) { return bound; }),
      bound_integral_(horizon * bound) {
  if (dim < 1) throw Error(ErrorKind::BadInput, "field dimension must be >= 1");
  if (!(horizon > 0.0)) throw Error(ErrorKind::BadInput, "horizon T must be > 0");
  if (!(bound >= 0.0) || !std::isfinite(bound)) {
    throw Error(ErrorKind::BadInput, "force bound must be finite and >= 0");
  }
}

ForceField::ForceField(int dim, double horizon, ForceFn eval, BoundFn bound,
                       int intervals)
    : dim_(dim),
      horizon_(horizon),
      eval_(std::move(eval)),
      bound_(std::move(bound)),
      bound_integral_(0.0) {
  if (dim < 1) throw Error(ErrorKind::BadInput, "field dimension must be >= 1");
  if (!(horizon > 0.0)) throw Error(ErrorKind::BadInput, "horizon T must be > 0");
  if (intervals < 1) throw Error(ErrorKind::BadInput, "need >= 1 interval");
  const double h = horizon / intervals;
  double left = bound_(0.0);
  for (int k = 0; k < intervals; ++k) {
    const double right = bound_(k + 1 == intervals ? horizon : (k + 1) * h);
    if (!(left >= 0.0) || !(right >= 0.0)) {
      throw Error(ErrorKind::BadInput, "bound m(t) must be nonnegative");
    }
    bound_integral_ += h * std::max(left, right);
    left = right;
  }
}

ForceField ForceField::shifted(const Vec& shift) const {
  ForceField out = *this;
  ForceFn inner = eval_;
  out.eval_ = [inner, shift](double t, const Vec& x) {
    return inner(t, Vec(x + shift));
  };
  return out;
}

ForceField zero_field(int dim, double horizon) {
  return ForceField(
      dim, horizon, [dim](double, const Vec&) { return Vec(Vec::Zero(dim)); },
      0.0);
}

ForceField constant_field(const Vec& value, double horizon) {
  return ForceField(
      static_cast<int>(value.size()), horizon,
      [value](double, const Vec&) { return value; }, value.norm());
}

Vec extend_f_star(const ForceField& field, const BoxDomain& domain, double t,
                  const Vec& z) {
  const Vec f = field(t, domain.fold(z));
  Vec out(z.size());
  for (int i = 0; i < domain.dim(); ++i) out[i] = domain.theta(i, z[i]) * f[i];
  return out;
}

double eta(const BoxDomain& domain, int i, double s, int m) {
  const double c = domain.edge(i);
  if (m < 1) throw Error(ErrorKind::BadInput, "regularization level m must be >= 1");
  if (!(s >= 0.0 && s <= c)) {
    std::ostringstream os;
    os << "ramp argument " << s << " outside [0, " << c << "]";
    throw Error(ErrorKind::BadInput, os.str());
  }
  const double ramp = c / (2.0 * m);
  if (s < ramp) return (2.0 * m / c) * s;
  if (s < c - ramp) return 1.0;
  return (2.0 * m / c) * (c - s);
}

Vec g_star(const ForceField& field, const BoxDomain& domain, double t,
           const Vec& z, int m) {
  Vec out = extend_f_star(field, domain, t, z);
  for (int i = 0; i < domain.dim(); ++i) {
    const double c = domain.edge(i);
    double r = z[i] - c * std::floor(z[i] / c);
    r = std::clamp(r, 0.0, c);
    out[i] *= eta(domain, i, r, m);
  }
  return out;
}

Vec g_star_in_cells(const ForceField& field, const BoxDomain& domain,
                    double t, const Vec& z, const std::vector<long>& cells,
                    std::optional<int> m) {
  const int n = domain.dim();
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = delta_in_cell(domain.edge(i), z[i], cells[i]);
  Vec out = field(t, x);
  for (int i = 0; i < n; ++i) {
    double w = theta_in_cell(cells[i]);
    if (m) {
      const double c = domain.edge(i);
      const double r =
          std::clamp(z[i] - static_cast<double>(cells[i]) * c, 0.0, c);
      w *= eta(domain, i, r, *m);
    }
    out[i] *= w;
  }
  return out;
}

PotentialTable gaussian_dimple(double g) {
  PotentialTable table;
  table.height = [](double x, double y) {
    return x * y * std::exp(-x * x - y * y);
  };
  table.gradient = [](double x, double y) {
    const double e = std::exp(-x * x - y * y);
    return Eigen::Vector2d(y * e * (1.0 - 2.0 * x * x),
                           x * e * (1.0 - 2.0 * y * y));
  };
  table.g = g;
  return table;
}

Eigen::Vector2d table_gradient(const PotentialTable& table, double x,
                               double y) {
  if (table.gradient) return table.gradient(x, y);
  const double hx = 1e-6 * std::max(1.0, std::abs(x));
  const double hy = 1e-6 * std::max(1.0, std::abs(y));
  return Eigen::Vector2d(
      (table.height(x + hx, y) - table.height(x - hx, y)) / (2.0 * hx),
      (table.height(x, y + hy) - table.height(x, y - hy)) / (2.0 * hy));
}

Eigen::Vector2d table_acceleration(const PotentialTable& table, double x,
                                   double y) {
  const Eigen::Vector2d grad = table_gradient(table, x, y);
  return -table.g * grad / (grad.squaredNorm() + 1.0);
}

double table_bound_constant(const PotentialTable& table,
                            const BoxDomain& box) {
  constexpr int kSamples = 512;
  double max_norm = 0.0;
  for (int a = 0; a < kSamples; ++a) {
    const double x =
        box.lower()[0] + box.edge(0) * a / static_cast<double>(kSamples - 1);
    for (int b = 0; b < kSamples; ++b) {
      const double y =
          box.lower()[1] + box.edge(1) * b / static_cast<double>(kSamples - 1);
      max_norm = std::max(max_norm, table_acceleration(table, x, y).norm());
    }
  }
  return std::min(1.05 * max_norm, 0.5 * table.g);
}

ForceField table_force(const PotentialTable& table, const BoxDomain& box,
                       double horizon, std::optional<double> bound) {
  if (box.dim() != 2) {
    throw Error(ErrorKind::BadInput, "table force needs a 2-D box");
  }
  if (!(table.g > 0.0)) {
    throw Error(ErrorKind::BadInput, "gravity constant g must be > 0");
  }
  const double m_c = bound ? *bound : table_bound_constant(table, box);
  return ForceField(
      2, horizon,
      [table](double, const Vec& x) {
        const Eigen::Vector2d a = table_acceleration(table, x[0], x[1]);
        return Vec(a);
      },
      m_c);
}

namespace {

double radical_inverse(unsigned long index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

BoundAudit audit_bound(const ForceField& field, const BoxDomain& box,
                       int samples) {
  if (samples < 1) throw Error(ErrorKind::BadInput, "audit needs >= 1 sample");
  const int n = box.dim();
  if (n + 1 > static_cast<int>(std::size(kPrimes))) {
    throw Error(ErrorKind::BadInput, "audit supports at most 15 dimensions");
  }
  BoundAudit report;
  report.samples = samples;
  report.max_excess = -std::numeric_limits<double>::infinity();
  report.min_slack = std::numeric_limits<double>::infinity();
  Vec x(n);
  for (int k = 0; k < samples; ++k) {
    const unsigned long idx = static_cast<unsigned long>(k) + 1;
    const double t = field.horizon() * radical_inverse(idx, kPrimes[0]);
    for (int i = 0; i < n; ++i) {
      x[i] = box.lower()[i] + box.edge(i) * radical_inverse(idx, kPrimes[i + 1]);
    }
    const double excess = field(t, x).norm() - field.bound(t);
    report.max_excess = std::max(report.max_excess, excess);
    report.min_slack = std::min(report.min_slack, -excess);
  }
  report.pass = report.max_excess <= 1e-12;
  if (!report.pass) {
    std::ostringstream os;
    os << "force exceeds its declared bound by " << report.max_excess;
    throw Error(ErrorKind::BoundViolation, os.str());
  }
  return report;
}

FieldRegistry& FieldRegistry::global() {
  static FieldRegistry registry = [] {
    FieldRegistry r;
    r.add("zero", [](const FieldSpec& spec, const BoxDomain& box, double T) {
      if (spec.bound) {
        return ForceField(
            box.dim(), T,
            [n = box.dim()](double, const Vec&) { return Vec(Vec::Zero(n)); },
            *spec.bound);
      }
      return zero_field(box.dim(), T);
    });
    r.add("constant",
          [](const FieldSpec& spec, const BoxDomain& box, double T) {
            auto it = spec.params.find("value");
            if (it == spec.params.end()) {
              throw Error(ErrorKind::BadInput,
                          "constant field needs a 'value' vector");
            }
            const Vec value = parse_vector(it->second);
            if (value.size() != box.dim()) {
              throw Error(ErrorKind::BadInput,
                          "constant field value has wrong dimension");
            }
            const double b = spec.bound ? *spec.bound : value.norm();
            return ForceField(
                box.dim(), T, [value](double, const Vec&) { return value; }, b);
          });
    r.add("table:gaussian-dimple",
          [](const FieldSpec& spec, const BoxDomain& box, double T) {
            double g = 9.81;
            if (auto it = spec.params.find("g"); it != spec.params.end()) {
              g = parse_double(it->second);
            }
            return table_force(gaussian_dimple(g), box, T, spec.bound);
          });
    return r;
  }();
  return registry;
}

void FieldRegistry::add(const std::string& name, Factory factory) {
  factories_[name] = std::move(factory);
}

bool FieldRegistry::contains(const std::string& name) const {
  return factories_.count(name) > 0;
}

std::vector<std::string> FieldRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, factory] : factories_) out.push_back(name);
  return out;
}

ForceField FieldRegistry::make(const FieldSpec& spec, const BoxDomain& box,
                               double T) const {
  std::string name = spec.name;
  if (name == "custom") {
    auto it = spec.params.find("custom");
    if (it == spec.params.end()) {
      throw Error(ErrorKind::BadInput,
                  "custom field needs a 'custom' key naming a registered factory");
    }
    name = it->second;
  }
  auto it = factories_.find(name);
  if (it == factories_.end()) {
    throw Error(ErrorKind::BadInput, "unknown force field '" + name + "'");
  }
  ForceField field = it->second(spec, box, T);
  if (field.dim() != box.dim()) {
    throw Error(ErrorKind::BadInput, "force field dimension does not match box");
  }
  return field;
}

}  // namespace bbvp

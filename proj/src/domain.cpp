#include "bbvp/domain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bbvp/error.hpp"

namespace bbvp {

BoxDomain::BoxDomain(Vec lower, Vec upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() == 0 || lower_.size() != upper_.size()) {
    throw Error(ErrorKind::BadInput,
                "box bounds must be non-empty vectors of equal dimension");
  }
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) ||
        !(lower_[i] < upper_[i])) {
      std::ostringstream os;
      os << "box axis " << i + 1 << " needs lower < upper, got [" << lower_[i]
         << ", " << upper_[i] << "]";
      throw Error(ErrorKind::BadInput, os.str());
    }
  }
  edges_ = upper_ - lower_;
}

BoxDomain BoxDomain::anchored(const Vec& edges) {
  return BoxDomain(Vec::Zero(edges.size()), edges);
}

bool BoxDomain::strictly_interior(const Vec& x) const {
  if (x.size() != lower_.size()) return false;
  const double eps = interior_eps();
  for (int i = 0; i < dim(); ++i) {
    if (!(x[i] > lower_[i] + eps && x[i] < upper_[i] - eps)) return false;
  }
  return true;
}

bool BoxDomain::contains(const Vec& x, double slack) const {
  if (x.size() != lower_.size()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (x[i] < lower_[i] - slack || x[i] > upper_[i] + slack) return false;
  }
  return true;
}

double BoxDomain::mod2c(int i, double s) const {
  const double period = 2.0 * edges_[i];
  double r = s - period * std::floor(s / period);
  if (r < 0.0) r = 0.0;
  if (r >= period) r = 0.0;
  return r;
}

bool BoxDomain::on_grid_line(int i, double s) const {
  const double c = edges_[i];
  const double r = mod2c(i, s);
  const double eps = grid_eps(i);
  return r <= eps || std::abs(r - c) <= eps || 2.0 * c - r <= eps;
}

int BoxDomain::theta(int i, double s) const {
  if (on_grid_line(i, s)) return 0;
  return mod2c(i, s) < edges_[i] ? 1 : -1;
}

double BoxDomain::delta(int i, double s) const {
  const double c = edges_[i];
  const double r = mod2c(i, s);
  const double d = r < c ? r : 2.0 * c - r;
  return std::clamp(d, 0.0, c);
}

Vec BoxDomain::fold(const Vec& z) const {
  Vec x(z.size());
  for (int i = 0; i < dim(); ++i) x[i] = delta(i, z[i]);
  return x;
}

long BoxDomain::raw_cell(int i, double s) const {
  return static_cast<long>(std::floor(s / edges_[i]));
}

long BoxDomain::cell_index(int i, double s) const {
  if (on_grid_line(i, s)) {
    std::ostringstream os;
    os << "value " << s << " lies on a grid line of axis " << i + 1
       << " (edge " << edges_[i] << ")";
    throw Error(ErrorKind::GridLine, os.str());
  }
  return raw_cell(i, s);
}

int theta_in_cell(long cell) { return (cell % 2 == 0) ? 1 : -1; }

double delta_in_cell(double c, double s, long cell) {
  const double base = static_cast<double>(cell) * c;
  const double d = (cell % 2 == 0) ? s - base : (base + c) - s;
  return std::clamp(d, 0.0, c);
}

Normalized normalize(const BoxDomain& domain, const Vec& A, const Vec& B) {
  if (!domain.strictly_interior(A)) {
    throw Error(ErrorKind::BadInput,
                "start point A must lie strictly inside the box");
  }
  if (!domain.strictly_interior(B)) {
    throw Error(ErrorKind::BadInput,
                "end point B must lie strictly inside the box");
  }
  const Vec& shift = domain.lower();
  return Normalized{BoxDomain::anchored(domain.edges()), A - shift, B - shift,
                    shift};
}

}  // namespace bbvp

#pragma once

#include <Eigen/Dense>

namespace bbvp {

using Vec = Eigen::VectorXd;

/// Axis-aligned box [lower_1, upper_1] x ... x [lower_n, upper_n].
///
/// The folding primitives (theta, delta, fold, cell_index) are defined with
/// respect to the edge lengths only, so they are meaningful for the
/// origin-anchored box produced by normalize(). Axis indices are 0-based.
class BoxDomain {
 public:
  BoxDomain(Vec lower, Vec upper);

  /// [0, c_1] x ... x [0, c_n].
  static BoxDomain anchored(const Vec& edges);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  const Vec& edges() const { return edges_; }
  double edge(int i) const { return edges_[i]; }
  double min_edge() const { return edges_.minCoeff(); }
  double diameter() const { return edges_.norm(); }
  bool is_anchored() const { return lower_.isZero(0.0); }

  /// Scale-relative tolerance for "s is a multiple of c_i".
  double grid_eps(int i) const { return 1e-9 * edges_[i]; }

  /// Margin used when testing strict interiority.
  double interior_eps() const { return 1e-9 * min_edge(); }

  bool strictly_interior(const Vec& x) const;
  bool contains(const Vec& x, double slack = 0.0) const;

  /// s mod 2c_i, always in [0, 2c_i).
  double mod2c(int i, double s) const;
  bool on_grid_line(int i, double s) const;

  /// +1 on even cells, -1 on odd cells, 0 on grid lines.
  int theta(int i, double s) const;

  /// 2c_i-periodic even triangle wave with range [0, c_i].
  double delta(int i, double s) const;

  /// Componentwise delta.
  Vec fold(const Vec& z) const;

  /// floor(s / c_i); throws ErrorKind::GridLine on grid lines.
  long cell_index(int i, double s) const;

  /// floor(s / c_i) without the grid-line check.
  long raw_cell(int i, double s) const;

 private:
  Vec lower_;
  Vec upper_;
  Vec edges_;
};

/// One-sided values of the fold inside a known cell [k c_i, (k+1) c_i].
/// These agree with theta/delta in the open cell and give the correct
/// one-sided limits on its boundary.
int theta_in_cell(long cell);
double delta_in_cell(double c, double s, long cell);

struct Normalized {
  BoxDomain box;
  Vec A;
  Vec B;
  Vec shift;
};

/// Shift the problem so that the box becomes [0,c_1] x ... x [0,c_n].
/// Throws ErrorKind::BadInput when A or B is not strictly interior.
Normalized normalize(const BoxDomain& domain, const Vec& A, const Vec& B);

}  // namespace bbvp

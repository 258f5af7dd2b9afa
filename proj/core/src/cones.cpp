#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stratmean/cones.hpp"
#include "stratmean/errors.hpp"
#include "stratmean/link_function.hpp"

namespace stratmean {

namespace {

constexpr double kPi = std::numbers::pi;

// Split wrapping arcs into pieces inside [0, L], sort and merge touching pieces.
std::vector<Arc> normalizeArcs(const std::vector<Arc>& in, double length, bool circular) {
  std::vector<Arc> pieces;
  for (Arc a : in) {
    if (circular && a.hi - a.lo >= length - 1e-12) return {{0.0, length}};
    if (circular && a.lo >= length - 1e-12) {
      const double shift = a.lo >= length ? length * std::floor(a.lo / length) : length;
      a.lo = std::max(a.lo - shift, 0.0);
      a.hi = std::max(a.hi - shift, a.lo);
    }
    if (circular && a.hi > length) {
      pieces.push_back({a.lo, length});
      pieces.push_back({0.0, a.hi - length});
    } else {
      pieces.push_back({a.lo, std::min(a.hi, length)});
    }
  }
  std::sort(pieces.begin(), pieces.end(), [](const Arc& x, const Arc& y) { return x.lo < y.lo || (x.lo == y.lo && x.hi < y.hi); });
  std::vector<Arc> merged;
  for (const auto& p : pieces) {
    if (!merged.empty() && p.lo <= merged.back().hi + 1e-12)
      merged.back().hi = std::max(merged.back().hi, p.hi);
    else
      merged.push_back(p);
  }
  if (circular && merged.size() >= 2 && merged.front().lo <= 1e-12 && merged.back().hi >= length - 1e-12) {
    merged.front() = {merged.back().lo, length + merged.front().hi};
    merged.pop_back();
    std::rotate(merged.begin(), merged.begin() + 1, merged.end());
  }
  if (circular && merged.size() == 1 && merged[0].lo <= 1e-12 && merged[0].hi >= length - 1e-12) merged[0] = {0.0, length};
  return merged;
}

std::vector<Arc> splitArcs(const std::vector<Arc>& in, double length) {
  std::vector<Arc> out;
  for (const auto& a : in) {
    if (a.hi > length) {
      out.push_back({a.lo, length});
      out.push_back({0.0, a.hi - length});
    } else {
      out.push_back(a);
    }
  }
  return out;
}

} // namespace

Eigen::MatrixXd orthonormalSpan(const Eigen::MatrixXd& columns, double relTol) {
  if (columns.cols() == 0 || columns.rows() == 0) return Eigen::MatrixXd(columns.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return Eigen::MatrixXd(columns.rows(), 0);
  int rank = 0;
  while (rank < s.size() && s[rank] > relTol * s[0]) ++rank;
  return svd.matrixU().leftCols(rank);
}

Eigen::MatrixXd subspaceIntersection(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index n = a.rows();
  if (a.cols() == 0 || b.cols() == 0) return Eigen::MatrixXd(n, 0);
  // x in both iff x = a y with (I - b b^T) a y = 0 (columns orthonormal).
  const Eigen::MatrixXd residual = (Eigen::MatrixXd::Identity(n, n) - b * b.transpose()) * a;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  std::vector<int> nullCols;
  for (Eigen::Index i = 0; i < a.cols(); ++i)
    if (i >= s.size() || s[i] <= 1e-10) nullCols.push_back(static_cast<int>(i));
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(nullCols.size()));
  for (std::size_t k = 0; k < nullCols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = a * svd.matrixV().col(nullCols[k]);
  return orthonormalSpan(out);
}

// --- ConeRepr ---------------------------------------------------------------------

ConeRepr ConeRepr::apexOnly(const TangentCone& cone) {
  ConeRepr r;
  r.cone_ = cone;
  if (cone.kind() == ConeKind::Linear) r.basis_ = Eigen::MatrixXd(cone.ambientDim(), 0);
  if (cone.kind() == ConeKind::Book) r.basis_ = Eigen::MatrixXd(cone.spineDim(), 0);
  return r;
}

ConeRepr ConeRepr::full(const TangentCone& cone) {
  ConeRepr r;
  r.cone_ = cone;
  switch (cone.kind()) {
  case ConeKind::Linear: r.basis_ = Eigen::MatrixXd::Identity(cone.ambientDim(), cone.ambientDim()); break;
  case ConeKind::Book:
    r.basis_ = Eigen::MatrixXd::Identity(cone.spineDim(), cone.spineDim());
    for (int j = 1; j <= cone.pages(); ++j) r.pages_.push_back(j);
    break;
  case ConeKind::Circle:
  case ConeKind::Sector: r.arcs_ = {{0.0, cone.linkLength()}}; break;
  }
  return r;
}

ConeRepr ConeRepr::subspace(const TangentCone& cone, const Eigen::MatrixXd& basis) {
  if (cone.kind() != ConeKind::Linear || basis.rows() != cone.ambientDim())
    throw Error(ErrorCode::InvalidArgument, "subspace cones need a linear tangent cone");
  ConeRepr r;
  r.cone_ = cone;
  r.basis_ = orthonormalSpan(basis);
  return r;
}

ConeRepr ConeRepr::bookPart(const TangentCone& cone, std::vector<int> pages, const Eigen::MatrixXd& spineBasis) {
  if (cone.kind() != ConeKind::Book || spineBasis.rows() != cone.spineDim())
    throw Error(ErrorCode::InvalidArgument, "book subcones need a book tangent cone");
  ConeRepr r;
  r.cone_ = cone;
  std::sort(pages.begin(), pages.end());
  pages.erase(std::unique(pages.begin(), pages.end()), pages.end());
  r.pages_ = std::move(pages);
  r.basis_ = orthonormalSpan(spineBasis);
  return r;
}

ConeRepr ConeRepr::arcs(const TangentCone& cone, std::vector<Arc> arcs) {
  if (cone.kind() != ConeKind::Circle && cone.kind() != ConeKind::Sector)
    throw Error(ErrorCode::InvalidArgument, "arc cones need a one-dimensional link");
  ConeRepr r;
  r.cone_ = cone;
  r.arcs_ = normalizeArcs(arcs, cone.linkLength(), cone.kind() == ConeKind::Circle);
  return r;
}

bool ConeRepr::isApexOnly() const {
  switch (cone_.kind()) {
  case ConeKind::Linear: return basis_.cols() == 0;
  case ConeKind::Book: return pages_.empty() && basis_.cols() == 0;
  default: return arcs_.empty();
  }
}

bool ConeRepr::isFull() const {
  switch (cone_.kind()) {
  case ConeKind::Linear: return basis_.cols() == cone_.ambientDim();
  case ConeKind::Book: return static_cast<int>(pages_.size()) == cone_.pages() && basis_.cols() == cone_.spineDim();
  default:
    return arcs_.size() == 1 && arcs_[0].hi - arcs_[0].lo >= cone_.linkLength() - 1e-12;
  }
}

bool ConeRepr::hasPage(int page) const { return std::binary_search(pages_.begin(), pages_.end(), page); }

bool ConeRepr::contains(const TangentVector& v, double tol) const {
  if (v.isApex) return true;
  switch (cone_.kind()) {
  case ConeKind::Linear: {
    const Eigen::VectorXd d = v.direction;
    return (d - basis_ * (basis_.transpose() * d)).norm() <= tol;
  }
  case ConeKind::Book: {
    if (v.chart != 0 && !hasPage(v.chart)) return false;
    const Eigen::VectorXd s = v.direction.tail(cone_.spineDim());
    if (s.size() == 0) return true;
    return (s - basis_ * (basis_.transpose() * s)).norm() <= tol;
  }
  default: {
    const double phi = cone_.linkCoordinate(v);
    const double len = cone_.linkLength();
    const bool circular = cone_.kind() == ConeKind::Circle;
    for (const auto& a : arcs_) {
      for (double shift : {0.0, len, -len}) {
        if (!circular && shift != 0.0) continue;
        const double x = phi + shift;
        if (x >= a.lo - tol && x <= a.hi + tol) return true;
      }
    }
    return false;
  }
  }
}

ConeRepr ConeRepr::intersect(const ConeRepr& other) const {
  if (!(cone_ == other.cone_)) throw Error(ErrorCode::MismatchedSpaces, "intersecting subcones of different cones");
  switch (cone_.kind()) {
  case ConeKind::Linear: {
    ConeRepr r = *this;
    r.basis_ = subspaceIntersection(basis_, other.basis_);
    return r;
  }
  case ConeKind::Book: {
    std::vector<int> pages;
    std::set_intersection(pages_.begin(), pages_.end(), other.pages_.begin(), other.pages_.end(), std::back_inserter(pages));
    return bookPart(cone_, pages, subspaceIntersection(basis_, other.basis_));
  }
  default: {
    const double len = cone_.linkLength();
    const auto a = splitArcs(arcs_, len), b = splitArcs(other.arcs_, len);
    std::vector<Arc> out;
    for (const auto& x : a)
      for (const auto& y : b) {
        const double lo = std::max(x.lo, y.lo), hi = std::min(x.hi, y.hi);
        if (lo <= hi + 1e-12) out.push_back({lo, std::max(lo, hi)});
      }
    return arcs(cone_, out);
  }
  }
}

TangentVector ConeRepr::sampleUnit(RngStream& rng) const {
  if (isApexOnly()) throw Error(ErrorCode::Infeasible, "cone is the apex only");
  switch (cone_.kind()) {
  case ConeKind::Linear: {
    Eigen::VectorXd g(basis_.cols());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
    Eigen::VectorXd x = basis_ * g;
    if (x.norm() == 0.0) x = basis_.col(0);
    return cone_.make(0, x / x.norm());
  }
  case ConeKind::Book: {
    const int choices = static_cast<int>(pages_.size()) + (basis_.cols() > 0 ? 1 : 0);
    int pick = std::min(static_cast<int>(rng.uniform() * choices), choices - 1);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(cone_.ambientDim());
    Eigen::VectorXd g(basis_.cols());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
    if (cone_.spineDim() > 0) x.tail(cone_.spineDim()) = basis_ * g;
    int chart = 0;
    if (pick < static_cast<int>(pages_.size())) {
      chart = pages_[pick];
      x[0] = std::abs(rng.normal()) + 1e-3;
    } else if (x.norm() == 0.0) {
      x.tail(cone_.spineDim()) = basis_.col(0);
    }
    return cone_.make(chart, x / x.norm());
  }
  default: {
    const auto& a = arcs_[std::min(static_cast<std::size_t>(rng.uniform() * arcs_.size()), arcs_.size() - 1)];
    return cone_.fromLink(a.lo + rng.uniform() * (a.hi - a.lo), 1.0);
  }
  }
}

std::string ConeRepr::describe() const {
  std::ostringstream os;
  switch (cone_.kind()) {
  case ConeKind::Linear: os << "subspace dim " << basis_.cols() << " of " << cone_.ambientDim(); break;
  case ConeKind::Book:
    os << "pages {";
    for (std::size_t i = 0; i < pages_.size(); ++i) os << (i ? "," : "") << pages_[i];
    os << "} spine dim " << basis_.cols();
    break;
  default:
    os << "arcs";
    for (const auto& a : arcs_) os << " [" << a.lo << "," << a.hi << "]";
    if (arcs_.empty()) os << " none";
  }
  return os.str();
}

// --- escape cone and hull -------------------------------------------------------------

ConeRepr escapeCone(const TangentCone& cone, const TangentMeasure& logged, double tol) {
  switch (cone.kind()) {
  case ConeKind::Linear:
    return ConeRepr::full(cone);
  case ConeKind::Book: {
    std::vector<double> onPage(cone.pages() + 1, 0.0);
    double all = 0.0;
    for (const auto& a : logged.atoms()) {
      if (a.vector.isApex || a.vector.chart == 0) continue;
      const double u = a.weight * a.vector.radius * a.vector.direction[0];
      onPage[a.vector.chart] += u;
      all += u;
    }
    std::vector<int> pages;
    for (int j = 1; j <= cone.pages(); ++j)
      if (2.0 * onPage[j] - all >= -tol) pages.push_back(j);
    return ConeRepr::bookPart(cone, pages, Eigen::MatrixXd::Identity(cone.spineDim(), cone.spineDim()));
  }
  default: {
    // Directional derivative is -g; E = {g >= -tol}. Pieces where g vanishes identically are whole
    // arcs; elsewhere g is a non-degenerate sinusoid and touches zero at isolated maxima only.
    const LinkFunction g(cone, logged);
    std::vector<Arc> out;
    for (const auto& p : g.pieces()) {
      if (g.minOn(p.lo, p.hi).value >= -tol) {
        out.push_back({p.lo, p.hi});
        continue;
      }
      const auto top = g.maxOn(p.lo, p.hi);
      if (top.value >= -tol) out.push_back({top.phi, top.phi});
    }
    return ConeRepr::arcs(cone, out);
  }
  }
}

ConeRepr hullCone(const TangentCone& cone, const TangentMeasure& logged) {
  switch (cone.kind()) {
  case ConeKind::Linear: {
    Eigen::MatrixXd cols(cone.ambientDim(), static_cast<Eigen::Index>(logged.size()));
    for (std::size_t i = 0; i < logged.size(); ++i) cols.col(static_cast<Eigen::Index>(i)) = cone.coords(logged.atoms()[i].vector);
    ConeRepr r = ConeRepr::subspace(cone, cols.cols() ? cols : Eigen::MatrixXd(cone.ambientDim(), 0));
    return r;
  }
  case ConeKind::Book: {
    std::vector<int> pages;
    Eigen::MatrixXd cols(cone.spineDim(), static_cast<Eigen::Index>(logged.size()));
    for (std::size_t i = 0; i < logged.size(); ++i) {
      const auto& v = logged.atoms()[i].vector;
      cols.col(static_cast<Eigen::Index>(i)) = cone.coords(v).tail(cone.spineDim());
      if (!v.isApex && v.chart > 0) pages.push_back(v.chart);
    }
    return ConeRepr::bookPart(cone, pages, cols);
  }
  default: {
    std::vector<double> phis;
    for (const auto& a : logged.atoms())
      if (!a.vector.isApex) phis.push_back(cone.linkCoordinate(a.vector));
    if (phis.empty()) return ConeRepr::apexOnly(cone);
    std::sort(phis.begin(), phis.end());
    std::vector<double> uniq;
    for (double p : phis)
      if (uniq.empty() || p - uniq.back() > 1e-12) uniq.push_back(p);
    const double len = cone.linkLength();
    const bool circular = cone.kind() == ConeKind::Circle;
    std::vector<Arc> out;
    for (std::size_t i = 0; i < uniq.size(); ++i) {
      out.push_back({uniq[i], uniq[i]});
      if (i + 1 < uniq.size() && uniq[i + 1] - uniq[i] < kPi - 1e-12) out.push_back({uniq[i], uniq[i + 1]});
    }
    if (circular && uniq.size() >= 1) {
      const double wrapGap = uniq.front() + len - uniq.back();
      if (wrapGap < kPi - 1e-12) out.push_back({uniq.back(), uniq.front() + len});
    }
    return ConeRepr::arcs(cone, out);
  }
  }
}

} // namespace stratmean

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stratmean/cones.hpp"
#include "stratmean/escape.hpp"
#include "stratmean/measure.hpp"
#include "stratmean/rng.hpp"

namespace stratmean {

enum class CollapseKind {
  Identity,      // linear tangent cones
  Zero,          // fluctuating cone is the apex: R^0
  PageFolding,   // page g -> +u axis, every other page -> -u axis, spine -> R^p
  SpineOnly,     // books whose fluctuating cone has no page: (u, v) -> v
  SectorFolding, // development around a base direction; directions farther than pi go to the antipodal ray
  Inclusion,     // sector cone sitting in R^2
};

const char* collapseKindName(CollapseKind kind);

class CollapseMap {
public:
  CollapseMap() = default;

  static CollapseMap identity(const TangentCone& cone);
  static CollapseMap zero(const TangentCone& cone);
  static CollapseMap pageFolding(const TangentCone& cone, int page);
  static CollapseMap spineOnly(const TangentCone& cone);
  static CollapseMap sectorFolding(const TangentCone& cone, double baseAngle);
  static CollapseMap inclusion(const TangentCone& cone);

  CollapseKind kind() const noexcept { return kind_; }
  const TangentCone& cone() const noexcept { return cone_; }
  int targetDim() const noexcept { return dim_; }
  int page() const noexcept { return page_; }
  double baseAngle() const noexcept { return base_; }
  std::string describe() const;

  Eigen::VectorXd operator()(const TangentVector& v) const;
  // Weighted sum of images, not the pushforward measure.
  Eigen::VectorXd operator()(const TangentMeasure& delta) const;

private:
  Eigen::VectorXd unitImage(const TangentVector& v) const;

  CollapseKind kind_ = CollapseKind::Identity;
  TangentCone cone_;
  int dim_ = 0;
  int page_ = 0;
  double base_ = 0.0;
};

struct CollapseAxiomReport {
  double meanResidual = 0.0;
  double isometryResidual = 0.0;
  double innerResidual = 0.0;
  double homogeneityResidual = 0.0;
  double continuityModulus = 0.0;

  bool meanZero = false;
  bool injective = false;
  bool innerPreserved = false;
  bool homogeneous = false;
  bool continuous = false;

  bool ok() const { return meanZero && injective && innerPreserved && homogeneous && continuous; }
  // 1..5, or 0 when everything passes.
  int firstFailure() const;
};

struct AxiomTolerances {
  double mean = 1e-9;
  double isometry = 1e-9;
  double inner = 1e-6;
  double homogeneity = 1e-12;
  double continuityBound = 10.0;
};

CollapseAxiomReport verifyCollapseAxioms(const CollapseMap& map, const MeanContext& ctx, int sampleBudget = 1000,
                                         std::uint64_t seed = 0x5eed, const AxiomTolerances& tol = {});

// Per-space choice of map; throws AxiomError when the chosen map fails the suite.
CollapseMap chooseCollapse(const MeanContext& ctx);

struct Generator {
  TangentVector direction;
  Eigen::VectorXd image;
};

struct GaussianMassSample {
  Eigen::VectorXd linearDraw; // in the target space of the collapse, inside span(hullBasis)
  TangentMeasure mass;
};

class CollapsedModel {
public:
  explicit CollapsedModel(MeanContext ctx);
  CollapsedModel(MeanContext ctx, CollapseMap map);

  const MeanContext& context() const noexcept { return ctx_; }
  const CollapseMap& map() const noexcept { return map_; }
  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
  // Columns: orthonormal eigenvectors of sigma with positive eigenvalue.
  const Eigen::MatrixXd& hullBasis() const noexcept { return hull_; }
  const Eigen::VectorXd& hullVariances() const noexcept { return variances_; }
  const std::vector<Generator>& generators() const noexcept { return generators_; }

  // Nonnegative combination of generators with image v and at most targetDim atoms; the
  // lexicographically smallest feasible support is returned when enumeration is affordable.
  TangentMeasure section(const Eigen::VectorXd& v) const;
  // Another section of v: generators tried in random order plus a random multiple of the
  // (image-free) logged measure.
  TangentMeasure randomSection(const Eigen::VectorXd& v, RngStream& rng) const;
  TangentVector distortion(const Eigen::VectorXd& v) const;

  Eigen::VectorXd drawLinear(RngStream& rng) const;
  GaussianMassSample sampleGaussianMass(RngStream& rng) const;

private:
  void build();
  TangentMeasure sectionOrdered(const Eigen::VectorXd& v, const std::vector<int>& order) const;
  void checkInHull(const Eigen::VectorXd& v) const;

  MeanContext ctx_;
  CollapseMap map_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd hull_;
  Eigen::VectorXd variances_;
  std::vector<Generator> generators_;
};

// Sigma = sum (w / M) L(W) L(W)^T over the logged measure.
Eigen::MatrixXd collapsedCovariance(const CollapseMap& map, const TangentMeasure& logged);

// Covariance of <W, V> and <W, U> under the normalized logged measure.
double tangentFieldCov(const MeanContext& ctx, const TangentVector& v, const TangentVector& w);

enum class LimitPath { EscapeOfSection, DistortionOfDraw };

// n draws of the limiting law, one RNG stream per draw keyed by (seed, firstStream + i).
std::vector<TangentVector> limitSample(const CollapsedModel& model, std::uint64_t seed, std::uint64_t firstStream,
                                       std::size_t n, LimitPath path = LimitPath::EscapeOfSection);

} // namespace stratmean

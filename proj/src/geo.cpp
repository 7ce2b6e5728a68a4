#include "qos/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qos/error.hpp"
#include "qos/kernels.hpp"

namespace qos {

GeoContext GeoContext::make(double latitude, double longitude) {
  if (!std::isfinite(latitude) || latitude < -90.0 || latitude > 90.0) {
    throw InputError("latitude out of range: " + std::to_string(latitude));
  }
  if (!std::isfinite(longitude) || longitude < -180.0 || longitude > 180.0) {
    throw InputError("longitude out of range: " + std::to_string(longitude));
  }
  return GeoContext{latitude, longitude};
}

double haversine_km(const GeoContext& a, const GeoContext& b) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double phi1 = a.latitude * deg;
  const double phi2 = b.latitude * deg;
  const double dphi = (b.latitude - a.latitude) * deg;
  const double dpsi = (b.longitude - a.longitude) * deg;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dpsi / 2.0);
  // Symmetric in (a, b): s1, s2 are squared and the cosine product commutes.
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

namespace {

double cosine_from(double dot, double na, double nb) {
  if (na <= 0.0 || nb <= 0.0 || dot <= 0.0) return 0.0;
  return std::min(1.0, dot / (na * nb));
}

}  // namespace

double cosine_users(const QosMatrix& q, std::size_t i, std::size_t j) {
  const auto a = q.row(i);
  const auto b = q.row(j);
  return cosine_from(kernels::dot(a, b), std::sqrt(kernels::dot(a, a)),
                     std::sqrt(kernels::dot(b, b)));
}

double cosine_services(const QosMatrix& q, std::size_t i, std::size_t j) {
  const auto a = q.column(i);
  const auto b = q.column(j);
  return cosine_from(kernels::dot(a, b), std::sqrt(kernels::dot(a, a)),
                     std::sqrt(kernels::dot(b, b)));
}

SimilarityView::SimilarityView(const QosMatrix& q, Axis axis)
    : vectors_(axis == Axis::users ? static_cast<const Grid&>(q) : q.Grid::transposed()) {
  norms_.resize(vectors_.rows());
  for (std::size_t i = 0; i < vectors_.rows(); ++i) {
    const auto v = vectors_.row(i);
    norms_[i] = std::sqrt(kernels::dot(v, v));
  }
}

double SimilarityView::similarity(std::size_t a, std::size_t b) const {
  return cosine_from(kernels::dot(vectors_.row(a), vectors_.row(b)), norms_[a], norms_[b]);
}

std::vector<double> SimilarityView::similarities_to(std::size_t a) const {
  std::vector<double> out(size());
  for (std::size_t b = 0; b < size(); ++b) out[b] = similarity(a, b);
  return out;
}

Grid SimilarityView::gram() const {
  Grid g(size(), size());
  for (std::size_t a = 0; a < size(); ++a) {
    for (std::size_t b = a; b < size(); ++b) {
      const double s = similarity(a, b);
      g(a, b) = s;
      g(b, a) = s;
    }
  }
  return g;
}

}  // namespace qos

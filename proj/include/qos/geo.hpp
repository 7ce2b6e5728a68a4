#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qos/matrix.hpp"

namespace qos {

inline constexpr double kEarthRadiusKm = 6371.0;

// Latitude/longitude in degrees.
struct GeoContext {
  double latitude = 0.0;
  double longitude = 0.0;

  // Throws InputError when a coordinate is out of range or not finite.
  static GeoContext make(double latitude, double longitude);

  friend bool operator==(const GeoContext&, const GeoContext&) = default;
};

// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(const GeoContext& a, const GeoContext& b);

// Cosine similarity of two users' QoS histories: the numerator runs over
// services both invoked, each norm over that user's own invoked services.
// Unobserved entries are zero, so this is the plain cosine of the rows.
// Returns 0 when either history is empty.
double cosine_users(const QosMatrix& q, std::size_t i, std::size_t j);

// Column-wise mirror of cosine_users.
double cosine_services(const QosMatrix& q, std::size_t i, std::size_t j);

enum class Axis { users, services };

// Contiguous copies of the rows (or columns) of a matrix with their L2 norms,
// for repeated cosine evaluations along one axis.
class SimilarityView {
 public:
  SimilarityView(const QosMatrix& q, Axis axis);

  std::size_t size() const { return vectors_.rows(); }
  double similarity(std::size_t a, std::size_t b) const;

  // False for an entity with no observed entry.
  bool has_history(std::size_t a) const { return norms_[a] > 0.0; }

  // Similarities of `a` against every entity, in index order.
  std::vector<double> similarities_to(std::size_t a) const;

  // Full symmetric similarity matrix (diagonal 1 for non-empty vectors).
  Grid gram() const;

 private:
  Grid vectors_;
  std::vector<double> norms_;
};

}  // namespace qos

#pragma once

#include "qos/filtering.hpp"
#include "qos/matrix.hpp"

namespace qos::test {

// The 10 x 10 response-time log of the worked example, with the (u1, s4)
// target at (0, 3). The u9/s9 entry is printed as "06" and read as 0.6.
inline QosMatrix example_log() {
  return QosMatrix::from_raw({
      {5.98, 0.22, 0.23, 0, 0.22, 0.52, 0.45, 0.56, 0.38, 0},
      {2.13, 0.26, 0.27, 0.25, 0.25, 0, 0.65, 0.64, 0.43, 0.72},
      {0.85, 0, 0.37, 0.35, 0.35, 0.11, 0.64, 0, 0.64, 1.21},
      {0.69, 0.22, 0.23, 0.22, 0, 0.34, 0.76, 0, 0.37, 0.55},
      {0.86, 0, 0.23, 0.22, 0.22, 0.36, 0.83, 0.86, 0.37, 0.61},
      {1.83, 0.25, 0, 0.26, 0.23, 0, 0.89, 0.92, 0.42, 0.86},
      {0.81, 0.24, 0.25, 0.23, 0.23, 0.25, 0, 0.91, 0.43, 0},
      {0, 0.24, 0.25, 0, 0.26, 0.33, 0.59, 0, 0.42, 1.85},
      {2.05, 0.21, 0, 0.20, 0.2, 0.43, 0.45, 0.71, 0.6, 0.64},
      {0.86, 0, 0.22, 0.2, 0.19, 0.38, 0.59, 0.62, 0, 0.49},
  });
}

// Hand-picked locations: users 0-3 in Europe, the rest spread worldwide.
inline Contexts example_user_contexts() {
  const double c[10][2] = {{52.5, 13.4},  {48.9, 2.35},   {50.1, 8.7},   {40.4, -3.7},
                           {35.7, 139.7}, {37.6, 127.0},  {31.2, 121.5}, {1.35, 103.8},
                           {40.7, -74.0}, {34.05, -118.2}};
  Contexts out;
  for (auto& p : c) out.push_back(GeoContext::make(p[0], p[1]));
  return out;
}

inline Contexts example_service_contexts() {
  const double c[10][2] = {{47.4, 8.5},   {51.5, -0.1},   {45.5, 9.2},   {39.9, 116.4},
                           {22.3, 114.2}, {-33.9, 151.2}, {37.8, -122.4}, {41.9, -87.6},
                           {19.4, -99.1}, {55.8, 37.6}};
  Contexts out;
  for (auto& p : c) out.push_back(GeoContext::make(p[0], p[1]));
  return out;
}

}  // namespace qos::test

#pragma once

#include <cmath>
#include <numbers>

#include "sslg/image.hpp"

namespace sslg {

/// Pitched stereo/RGB-D rig. World axes: X right, Y down, Z forward, with
/// the cyclopean optical center at the origin and the camera pitched down by
/// `theta` about X. A world point maps to camera coordinates as
///   x_c = X,  y_c = Y cos(theta) - Z sin(theta),  z_c = Y sin(theta) + Z cos(theta)
/// and projects to U = f x_c / z_c, V = f y_c / z_c, disparity f b / z_c.
struct CameraModel {
  double f = 640.0;    // focal length, pixels
  double b = 0.05;     // baseline, meters
  double theta = 0.0;  // pitch, radians
  double u0 = 640.0;   // principal point, pixels
  double v0 = 360.0;

  void validate() const {
    if (!(f > 0.0)) throw Error("camera: focal length must be positive");
    if (!(b > 0.0)) throw Error("camera: baseline must be positive");
    if (!(std::abs(theta) < std::numbers::pi / 2))
      throw Error("camera: pitch must lie in (-pi/2, pi/2)");
  }

  /// Disparity for a point at optical-axis depth `z_cam` meters.
  double disparity(double z_cam) const { return f * b / z_cam; }
};

}  // namespace sslg

#include <cmath>
#include <string>

#include "geometry/camera.hpp"

namespace snail::geometry {

void validate(const Pose& p) {
  for (int i = 0; i < 6; ++i)
    if (!std::isfinite(p[i])) throw GeometryError("pose component " + std::to_string(i) + " is not finite");
}

void validate(const Intrinsics& k) {
  if (!(k.fx > 0) || !(k.fy > 0)) throw GeometryError("focal lengths must be positive");
  if (!std::isfinite(k.cx) || !std::isfinite(k.cy)) throw GeometryError("principal point must be finite");
}

void validate(const CorrespondenceSet& c, size_t min_points) {
  if (c.image.size() != c.map.size()) throw GeometryError("image and map point counts differ");
  if (c.size() < min_points)
    throw GeometryError("need at least " + std::to_string(min_points) + " correspondences, got " +
                        std::to_string(c.size()));
}

}  // namespace snail::geometry

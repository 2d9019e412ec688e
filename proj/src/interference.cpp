#include "gfk/interference.hpp"

#include <stdexcept>

#include "gfk/errors.hpp"

namespace gfk {

std::vector<Vec3d> platform_interference(std::span<const Pose> poses,
                                         std::span<const Vec3d> ambient,
                                         const InterferenceCoefficients& coef) {
  if (poses.size() != ambient.size())
    throw ContractError("pose and ambient-field counts differ");
  if (poses.size() < 2)
    throw std::domain_error("platform interference needs at least 2 samples");

  // ambient field in the body frame at every sample
  std::vector<Vec3d> body(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i)
    body[i] = mat_tvec(poses[i].orientation, ambient[i]);

  std::vector<Vec3d> out(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const std::size_t a = (i == 0) ? 0 : i - 1;
    const std::size_t b = (i == 0) ? 1 : i;
    const double dt = poses[b].t - poses[a].t;
    if (!(dt > 0.0)) throw std::domain_error("pose timestamps must be strictly increasing");
    const Vec3d db{(body[b][0] - body[a][0]) / dt, (body[b][1] - body[a][1]) / dt,
                   (body[b][2] - body[a][2]) / dt};
    const Vec3d body_total = coef.permanent + mat_vec(coef.susceptibility, body[i]) +
                             mat_vec(coef.eddy, db);
    out[i] = mat_vec(poses[i].orientation, body_total);
  }
  return out;
}

}  // namespace gfk

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wgplvm/data_io.hpp"

namespace wgplvm {

// Desk-scale stand-in datasets. Each generator emits CSV text in the format of
// the matching loader, with the ground-truth latent as the label column.
//
//   sphere_circle   n=100 noise=0.05 radius=1.0
//       noisy small circle of geodesic radius `radius` around (0,0,1) on S^2;
//       label is the angle t. Noise is isotropic Gaussian in the tangent plane.
//   spd_geodesic    n=120 dim=3 noise=0.1 span=2.0
//       exp(t D + E) for t ~ U[-1,1], a seeded direction D with |D|_F = span
//       and E symmetric with N(0, noise^2) canonical coordinates; label t.
//   kendall_family  n=60 landmarks=8 noise=0.02
//       regular polygon stretched by s ~ U[-1,1], with landmark noise and a
//       random rotation, scale and translation per shape; label s.
struct SyntheticData {
  std::string kind;
  std::string csv;
  // Matrix size for spd_geodesic, landmark count for kendall_family.
  int size = 0;

  // Parses `csv` through the loader for its kind (reference shape 0 for
  // landmarks). Labels keep the ground truth; label_name is "t".
  Dataset load() const;
};

using SyntheticParams = std::map<std::string, double>;

const std::vector<std::string>& synthetic_kinds();
// Defaults for `kind`, overridden by `params`. Unknown kinds, unknown
// parameter names and out-of-range values raise ConfigError.
SyntheticParams synthetic_params(const std::string& kind, const SyntheticParams& params);
SyntheticData synthesize(const std::string& kind, const SyntheticParams& params, std::uint64_t seed);

}  // namespace wgplvm

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wgplvm/model.hpp"

namespace wgplvm {

inline constexpr int kCheckpointVersion = 1;

// A fitted model plus the points held out from its training split.
struct Checkpoint {
  ModelState state;
  std::vector<Point> heldout;
  std::vector<std::string> heldout_labels;
};

// JSON text, tagged with kCheckpointVersion. Doubles round-trip exactly.
std::string checkpoint_to_json(const Checkpoint& c);
// Throws DataError on malformed or version-mismatched input.
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// "Sphere(2)", "Product(Sphere(2),Euclidean(3))", ... as produced by Manifold::name().
Manifold manifold_from_name(const std::string& name);

}  // namespace wgplvm

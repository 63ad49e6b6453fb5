#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hipcap/data/dataset.hpp"

namespace hipcap {

/// Synthetic shape scenes with template captions.
struct SceneWorldConfig {
    double canvas = 100.0;
    std::size_t feature_dim = 16;       // >= 16: 6 shape + 6 color + 4 geometry dims, extra dims are clutter
    std::size_t min_shapes = 2;
    std::size_t max_shapes = 6;
    double nesting_rate = 0.3;          // probability that a scene nests a shape inside another
    double region_noise = 0.3;
    double instance_noise = 0.1;
    std::size_t captions_per_scene = 3;
    std::size_t val_count = 0;          // trailing scenes marked "val"
};

inline constexpr std::size_t kSceneWorldShapes = 6;
inline constexpr std::size_t kSceneWorldColors = 6;
inline constexpr std::size_t kSceneWorldRelations = 5;  // above, below, left of, right of, inside

const std::vector<std::string>& sceneworld_shape_names();
const std::vector<std::string>& sceneworld_color_names();

/// Deterministic in (seed, scene index): a longer run extends a shorter one.
std::vector<SceneRecord> generate_sceneworld(std::uint64_t seed, std::size_t n_scenes,
                                             const SceneWorldConfig& config = {});

}  // namespace hipcap

#ifndef FILM_CHECKPOINT_HPP
#define FILM_CHECKPOINT_HPP

#include <optional>
#include <string>

#include "film/data.hpp"
#include "film/model.hpp"

namespace film::checkpoint {

/// On-disk model state: config, mode selections, every parameter tensor and
/// the fitted scaler. Binary, versioned, bit-exact across save/load.
struct Checkpoint {
    model::FiLMConfig config;
    std::uint64_t seed = 0;
    std::vector<std::vector<Eigen::Index>> mode_indices; // per expert
    model::FiLMParams params;
    std::optional<data::Scaler> scaler;
};

void save(const std::string& path, const Checkpoint& ckpt);
Checkpoint load(const std::string& path);

/// Rebuild the model context a checkpoint was trained with, using the stored
/// mode indices rather than reselecting.
model::ModelContext context_from(const Checkpoint& ckpt);

} // namespace film::checkpoint

#endif

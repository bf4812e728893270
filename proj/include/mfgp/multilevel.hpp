#pragma once

#include "mfgp/training.hpp"

namespace mfgp {

/// Three-level sequential training, e.g. SC[SC[SE]]: level 1 on raw inputs,
/// then two effective-kernel stages, each trained on its own level.
/// Throws InputError unless both the data and the composition have depth 3.
TrainResult train_multilevel(const FidelityDataset& data, const CompositionSpec& spec,
                             const TrainConfig& config);

}  // namespace mfgp

#include "mfgp/multilevel.hpp"

#include <string>

#include "mfgp/errors.hpp"

namespace mfgp {

TrainResult train_multilevel(const FidelityDataset& data, const CompositionSpec& spec,
                             const TrainConfig& config) {
  if (spec.depth() != 3) {
    throw InputError("multilevel training needs a depth-3 composition, got " + spec.to_string());
  }
  if (data.level_count() != 3) {
    throw InputError("multilevel training needs three fidelity levels, got " +
                     std::to_string(data.level_count()));
  }
  return train_sequential(data, spec, config);
}

}  // namespace mfgp

#pragma once

#include <string>

#include "peg/config.hpp"
#include "peg/params.hpp"

namespace peg {

// Binary checkpoint: magic + version, a key=value config block, then every
// parameter tensor named by module path.
void save_checkpoint(const std::string& path, const TrainConfig& cfg,
                     const ad::ParamStore& params);

// Restores config and overwrites matching tensors in `params`. The store must
// already contain identically shaped parameters (build the model first).
TrainConfig load_checkpoint(const std::string& path, ad::ParamStore& params);

// Reads only the embedded config (to rebuild the model before loading).
TrainConfig peek_checkpoint_config(const std::string& path);

}  // namespace peg

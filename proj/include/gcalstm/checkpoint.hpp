#pragma once

#include <string>

#include "gcalstm/model.hpp"

namespace gcalstm {

// Self-describing binary container: magic, a JSON manifest holding the full
// model configuration and the tensor table (name, shape, registration order),
// then all tensor values as raw little-endian doubles. Round-trips are
// bit-exact.
void save_checkpoint(const std::string& path, const Model& model);

// Rebuilds the model from the stored configuration. Every tensor in the file
// is validated against the rebuilt model's registration; mismatches are
// rejected naming the offending tensor.
Model load_checkpoint(const std::string& path);

}  // namespace gcalstm

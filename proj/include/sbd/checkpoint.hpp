#pragma once

#include <string>

#include "sbd/rcnn.hpp"

namespace sbd::model {

// Single-file checkpoint: a text manifest (key=value hyperparameters,
// the vocabulary, block names with shapes) followed by the parameter
// blocks as little-endian 64-bit floats in manifest order. The loader
// validates every shape before accepting. Round-trips bit-exactly.
void save_checkpoint(const SbdModel& model, const std::string& path);
SbdModel load_checkpoint(const std::string& path);

} // namespace sbd::model

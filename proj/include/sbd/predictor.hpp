#pragma once

#include <vector>

#include "sbd/rcnn.hpp"

namespace sbd::model {

// Per-token P(boundary) for a normalized token stream. Windows advance
// by ceil(phi/2); tokens covered by several windows get the mean
// probability; dropout is off. Safe for concurrent callers on a frozen
// model.
std::vector<double> predict_boundaries(const SbdModel& model,
                                       const std::vector<corpus::Token>& tokens);

// Boundary after token t iff p[t] >= threshold; the final token always
// closes the last sentence. The concatenation of the sentences is the
// input stream.
std::vector<std::vector<corpus::Token>> segment(const std::vector<corpus::Token>& tokens,
                                                const std::vector<double>& p_boundary,
                                                double threshold);

std::vector<corpus::Label> labels_from_probabilities(const std::vector<double>& p_boundary,
                                                     double threshold);

} // namespace sbd::model

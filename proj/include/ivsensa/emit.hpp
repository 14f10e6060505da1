// Text artifacts for plotting: curves and bands rendered as CSV or JSON
// with six-significant-digit numbers, written atomically.
#pragma once

#include <string>

#include "ivsensa/types.hpp"

namespace ivsensa {

enum class EmitFormat { csv, json };

// printf %.6g rendering, independent of the process locale.
std::string render_number(double v);

// Rows "theta,lower,upper,feasible"; infeasible rows leave the bound
// fields empty.  The JSON shape mirrors the CSV with null bounds.
std::string curve_to_csv(const SensitivityCurve& curve);
std::string curve_to_json(const SensitivityCurve& curve);
std::string render_curve(const SensitivityCurve& curve, EmitFormat format);

// Inverse of curve_to_csv, for round-trip checks and downstream reuse.
// Throws std::invalid_argument when the text does not match that shape.
SensitivityCurve parse_curve_csv(const std::string& text);

// Writes through a sibling temporary file plus rename, so a reader never
// sees a half-written artifact.  Throws std::runtime_error on IO failure.
void write_text_atomic(const std::string& path, const std::string& text);

}  // namespace ivsensa

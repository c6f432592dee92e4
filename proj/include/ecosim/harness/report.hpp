#pragma once

#include <string>

#include "ecosim/harness/experiment.hpp"

namespace ecosim::harness {

/// Writes the figure CSVs, SVG plots, and manifest.json into `dir` (created
/// if missing). All numbers use 9-significant-digit decimal formatting, so
/// identical inputs produce byte-identical files; manifest.json lists every
/// other emitted file with an fnv1a64 content hash, and only its
/// generated_at timestamp varies between runs. Throws std::runtime_error on
/// I/O failure.
void emit_report(const SweepResult& result, const std::string& dir);

}  // namespace ecosim::harness

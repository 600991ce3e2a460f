#pragma once

#include <cstdint>
#include <memory>

#include "muz/engine.hpp"

namespace muz::detail {

// Thrown by a replayed Sample site that has no recorded value.
struct ReplayMiss {};

// One step of an embedded inference site (infer or APF.infer). `cell` is null
// on the first step.
std::shared_ptr<const InferCell> infer_site_step(const Machine& m, const ir::Node& n, std::uint64_t stream,
                                                 const InferCell* cell, const Value& input, const Value& prior,
                                                 const InferOptions& opt, Value& out);

std::uint64_t mix64(std::uint64_t x);

}  // namespace muz::detail

#pragma once

#include "embed.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "generators.hpp"
#include "graph.hpp"
#include "io.hpp"
#include "pmi.hpp"
#include "random.hpp"
#include "spectral.hpp"

namespace infwalk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace infwalk

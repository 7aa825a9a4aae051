#pragma once

// Umbrella header: the whole library in one include.

#include "core.hpp"            // IWYU pragma: export
#include "cost.hpp"            // IWYU pragma: export
#include "cross_validate.hpp"  // IWYU pragma: export
#include "crossbar.hpp"        // IWYU pragma: export
#include "dataset.hpp"         // IWYU pragma: export
#include "pnn.hpp"             // IWYU pragma: export
#include "quantizer.hpp"       // IWYU pragma: export
#include "threshold_logic.hpp" // IWYU pragma: export

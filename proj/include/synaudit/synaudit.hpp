#pragma once

// Umbrella header for the synaudit library: membership-inference auditing
// of synthetic tabular data under the no-box threat model.

#include "synaudit/attacks.hpp"
#include "synaudit/common.hpp"
#include "synaudit/dataset.hpp"
#include "synaudit/density.hpp"
#include "synaudit/encode.hpp"
#include "synaudit/eval.hpp"
#include "synaudit/harness.hpp"
#include "synaudit/neighbors.hpp"
#include "synaudit/toygen.hpp"

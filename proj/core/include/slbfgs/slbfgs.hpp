#pragma once

// Umbrella header.

#include "slbfgs/baselines.hpp"
#include "slbfgs/errors.hpp"
#include "slbfgs/io.hpp"
#include "slbfgs/lbfgs_pairs.hpp"
#include "slbfgs/problems.hpp"
#include "slbfgs/rng.hpp"
#include "slbfgs/shift_ops.hpp"
#include "slbfgs/shifted_solver.hpp"
#include "slbfgs/types.hpp"

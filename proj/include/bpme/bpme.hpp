#pragma once

// Branching processes in a Markovian environment: exact analytics,
// extinction matrices via the matrix generating function, and a seedable
// Monte Carlo engine with a statistical validation harness.

#include "bpme/asymptotics.hpp"
#include "bpme/errors.hpp"
#include "bpme/genfun.hpp"
#include "bpme/graph.hpp"
#include "bpme/io.hpp"
#include "bpme/matrix.hpp"
#include "bpme/model.hpp"
#include "bpme/rng.hpp"
#include "bpme/simulate.hpp"
#include "bpme/validate.hpp"
#include "bpme/version.hpp"

#pragma once

#include "swarmkit/aco.hpp"
#include "swarmkit/error.hpp"
#include "swarmkit/experiment.hpp"
#include "swarmkit/objective.hpp"
#include "swarmkit/parallel.hpp"
#include "swarmkit/problems.hpp"
#include "swarmkit/pso.hpp"
#include "swarmkit/rng.hpp"
#include "swarmkit/trace.hpp"

#pragma once

// Umbrella header.

#include "cflab/diagnostics.hpp"
#include "cflab/geometry.hpp"
#include "cflab/hamiltonian.hpp"
#include "cflab/integrator.hpp"
#include "cflab/io.hpp"
#include "cflab/lyapunov.hpp"
#include "cflab/odeint.hpp"
#include "cflab/parallel.hpp"
#include "cflab/scenarios.hpp"
#include "cflab/types.hpp"

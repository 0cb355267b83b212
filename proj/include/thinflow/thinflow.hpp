// thinflow.hpp -- convenience umbrella for the whole library.
#pragma once

#include "thinflow/averaging.hpp"
#include "thinflow/common.hpp"
#include "thinflow/csv.hpp"
#include "thinflow/evolution.hpp"
#include "thinflow/experiments.hpp"
#include "thinflow/geometry.hpp"
#include "thinflow/ginzburg_landau.hpp"
#include "thinflow/grid.hpp"
#include "thinflow/linear_system.hpp"
#include "thinflow/operators.hpp"
#include "thinflow/parallel.hpp"
#include "thinflow/rates.hpp"
#include "thinflow/run_config.hpp"
#include "thinflow/surface_solver.hpp"
#include "thinflow/thin_solver.hpp"

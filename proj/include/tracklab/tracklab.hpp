#pragma once

#include "tracklab/control_map.hpp"
#include "tracklab/errors.hpp"
#include "tracklab/explorer.hpp"
#include "tracklab/maps_pde.hpp"
#include "tracklab/problem.hpp"
#include "tracklab/report.hpp"
#include "tracklab/scenario.hpp"
#include "tracklab/solver.hpp"
#include "tracklab/spaces.hpp"

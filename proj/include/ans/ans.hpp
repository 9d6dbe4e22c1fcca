#pragma once

// Everything except the acceptance harness and the test oracles.

#include "ans/action.hpp"
#include "ans/episode.hpp"
#include "ans/errors.hpp"
#include "ans/geometry.hpp"
#include "ans/grid.hpp"
#include "ans/io.hpp"
#include "ans/mapping.hpp"
#include "ans/noise.hpp"
#include "ans/parallel.hpp"
#include "ans/planner.hpp"
#include "ans/policies.hpp"
#include "ans/pose_estimator.hpp"
#include "ans/render.hpp"
#include "ans/world.hpp"

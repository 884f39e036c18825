#pragma once

// Umbrella header for the library. The experiment layer (experiment.hpp) is
// left out because it pulls in Boost.PropertyTree.

#include "hetnet/anacov.hpp"
#include "hetnet/error.hpp"
#include "hetnet/functionals.hpp"
#include "hetnet/pointproc.hpp"
#include "hetnet/quad.hpp"
#include "hetnet/rng.hpp"
#include "hetnet/scenario.hpp"
#include "hetnet/simcov.hpp"

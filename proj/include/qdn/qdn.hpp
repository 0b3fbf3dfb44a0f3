#pragma once

// Umbrella header for the detector-network simulator.

#include "qdn/dense_oracle.hpp"
#include "qdn/errors.hpp"
#include "qdn/experiments.hpp"
#include "qdn/netdef.hpp"
#include "qdn/path_integral.hpp"
#include "qdn/povm.hpp"
#include "qdn/random.hpp"
#include "qdn/register.hpp"
#include "qdn/stage.hpp"

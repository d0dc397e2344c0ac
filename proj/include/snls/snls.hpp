#pragma once

#include "snls/brownian.hpp"
#include "snls/config.hpp"
#include "snls/dynamics.hpp"
#include "snls/error.hpp"
#include "snls/exponents.hpp"
#include "snls/grid.hpp"
#include "snls/io.hpp"
#include "snls/montecarlo.hpp"
#include "snls/noise.hpp"
#include "snls/propagator.hpp"
#include "snls/solver.hpp"
#include "snls/trajectory.hpp"
#include "snls/verify.hpp"

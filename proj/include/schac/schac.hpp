#pragma once

#include "schac/config.hpp"
#include "schac/ensemble.hpp"
#include "schac/errors.hpp"
#include "schac/experiments.hpp"
#include "schac/fft.hpp"
#include "schac/grid.hpp"
#include "schac/noise.hpp"
#include "schac/operators.hpp"
#include "schac/potential.hpp"
#include "schac/properties.hpp"
#include "schac/report.hpp"
#include "schac/rng.hpp"
#include "schac/snapshot.hpp"
#include "schac/solver.hpp"
#include "schac/stats.hpp"

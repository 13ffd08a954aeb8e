#pragma once

#include "rabbitt/tdse/eigen.hpp"
#include "rabbitt/tdse/field.hpp"
#include "rabbitt/tdse/grid.hpp"
#include "rabbitt/tdse/propagator.hpp"
#include "rabbitt/tdse/scan.hpp"
#include "rabbitt/tdse/spectrum.hpp"

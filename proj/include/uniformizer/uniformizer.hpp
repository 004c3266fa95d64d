#pragma once

// Umbrella header: numerical computation with Fuchsian uniformizations of
// Riemann surfaces — Moebius maps, group enumeration, factors of automorphy,
// automorphic series, Bergman-space analysis, dimension bookkeeping and
// degenerating families.

#include "analysis.hpp"
#include "common.hpp"
#include "contour.hpp"
#include "dimensions.hpp"
#include "factors.hpp"
#include "families.hpp"
#include "fuchsian.hpp"
#include "moebius.hpp"
#include "quadrature.hpp"

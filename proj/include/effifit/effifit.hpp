#pragma once

// Circle-fit efficiency laboratory: geometric and algebraic circle fits,
// KCR lower bounds, and Monte Carlo efficiency measurement.

#include "effifit/errors.hpp"
#include "effifit/fitters.hpp"
#include "effifit/geometry.hpp"
#include "effifit/io.hpp"
#include "effifit/kcr.hpp"
#include "effifit/la_oracle.hpp"
#include "effifit/mc.hpp"
#include "effifit/noise.hpp"
#include "effifit/psd.hpp"
#include "effifit/rng.hpp"

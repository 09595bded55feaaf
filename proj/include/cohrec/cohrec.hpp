#pragma once

// Umbrella header for the coherence-recovery simulator.

#include "cohrec/channel.hpp"
#include "cohrec/constants.hpp"
#include "cohrec/errors.hpp"
#include "cohrec/measurement.hpp"
#include "cohrec/montecarlo.hpp"
#include "cohrec/polarization.hpp"
#include "cohrec/quadrature.hpp"
#include "cohrec/rng.hpp"
#include "cohrec/scans.hpp"
#include "cohrec/spectrum.hpp"

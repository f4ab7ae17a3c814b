#pragma once

#include "mcdual/asymptotics.hpp"
#include "mcdual/bifurcation.hpp"
#include "mcdual/bound_state.hpp"
#include "mcdual/concentration.hpp"
#include "mcdual/duality.hpp"
#include "mcdual/errors.hpp"
#include "mcdual/forced.hpp"
#include "mcdual/integrate.hpp"
#include "mcdual/potential.hpp"
#include "mcdual/scattering.hpp"
#include "mcdual/shooting.hpp"
#include "mcdual/spectral.hpp"

#pragma once

#include "qwalk/coin.hpp"
#include "qwalk/config.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/konno.hpp"
#include "qwalk/lattice.hpp"
#include "qwalk/momentum.hpp"
#include "qwalk/quadrature.hpp"
#include "qwalk/scattering.hpp"
#include "qwalk/types.hpp"
#include "qwalk/weaklimit.hpp"

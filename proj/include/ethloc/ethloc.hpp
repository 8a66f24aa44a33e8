#pragma once

#include "ethloc/ansatz.hpp"
#include "ethloc/density.hpp"
#include "ethloc/error.hpp"
#include "ethloc/experiments.hpp"
#include "ethloc/hamiltonians.hpp"
#include "ethloc/linalg.hpp"
#include "ethloc/localize.hpp"
#include "ethloc/quadrature.hpp"
#include "ethloc/random.hpp"
#include "ethloc/scrambling.hpp"

#pragma once

#include "levydiv/model.hpp"
#include "levydiv/roots.hpp"
#include "levydiv/scale.hpp"
#include "levydiv/barrier.hpp"
#include "levydiv/quadrature.hpp"
#include "levydiv/generator.hpp"
#include "levydiv/simulate.hpp"

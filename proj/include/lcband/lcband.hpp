#pragma once

#include "lcband/band.hpp"
#include "lcband/ccp.hpp"
#include "lcband/design.hpp"
#include "lcband/errors.hpp"
#include "lcband/lpsolve.hpp"
#include "lcband/pipeline.hpp"
#include "lcband/relax.hpp"
#include "lcband/simulate.hpp"
#include "lcband/specfun.hpp"

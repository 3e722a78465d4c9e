#pragma once

#include "deflatron/analysis.hpp"
#include "deflatron/config.hpp"
#include "deflatron/core.hpp"
#include "deflatron/eig.hpp"
#include "deflatron/experiments.hpp"
#include "deflatron/matrix_market.hpp"
#include "deflatron/problems.hpp"
#include "deflatron/projection.hpp"
#include "deflatron/rng.hpp"
#include "deflatron/serialize.hpp"
#include "deflatron/solvers.hpp"
#include "deflatron/sparse.hpp"
#include "deflatron/subspaces.hpp"

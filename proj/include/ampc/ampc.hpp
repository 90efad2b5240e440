#pragma once

#include "ampc/biconnectivity.hpp"
#include "ampc/connectivity.hpp"
#include "ampc/contraction.hpp"
#include "ampc/errors.hpp"
#include "ampc/graph.hpp"
#include "ampc/harness.hpp"
#include "ampc/mis.hpp"
#include "ampc/oracles.hpp"
#include "ampc/primitives.hpp"
#include "ampc/random.hpp"
#include "ampc/runtime.hpp"
#include "ampc/trees.hpp"

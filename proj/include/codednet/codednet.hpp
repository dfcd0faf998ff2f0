#pragma once

#include "codednet/channel.hpp"
#include "codednet/curves.hpp"
#include "codednet/dual.hpp"
#include "codednet/model.hpp"
#include "codednet/oracle.hpp"
#include "codednet/phy.hpp"
#include "codednet/rng.hpp"
#include "codednet/scenario.hpp"
#include "codednet/solver.hpp"
#include "codednet/subproblems.hpp"
#include "codednet/trace_io.hpp"

#pragma once

#include "kinfluid/core.hpp"
#include "kinfluid/entropy.hpp"
#include "kinfluid/fluid.hpp"
#include "kinfluid/kinetic.hpp"
#include "kinfluid/limit.hpp"
#include "kinfluid/moments.hpp"

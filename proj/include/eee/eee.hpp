#pragma once

#include "eee/config.hpp"
#include "eee/count_distribution.hpp"
#include "eee/errors.hpp"
#include "eee/performance.hpp"
#include "eee/planner.hpp"
#include "eee/poisson.hpp"
#include "eee/sim/batch_means.hpp"
#include "eee/sim/random.hpp"
#include "eee/sim/simulator.hpp"
#include "eee/tau_policy.hpp"
#include "eee/tradeoff.hpp"
#include "eee/vacation.hpp"

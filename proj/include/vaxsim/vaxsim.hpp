#pragma once

#include "vaxsim/betweenness.hpp"
#include "vaxsim/campaigns.hpp"
#include "vaxsim/epidemic.hpp"
#include "vaxsim/graph.hpp"
#include "vaxsim/harness.hpp"
#include "vaxsim/opinion.hpp"
#include "vaxsim/rng.hpp"
#include "vaxsim/stats.hpp"

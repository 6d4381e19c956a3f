#pragma once

#include "retrostar/baselines/greedy.hpp"
#include "retrostar/baselines/mcts.hpp"
#include "retrostar/baselines/pns.hpp"
#include "retrostar/bench.hpp"
#include "retrostar/common.hpp"
#include "retrostar/domains/brute_force.hpp"
#include "retrostar/domains/cache.hpp"
#include "retrostar/domains/features.hpp"
#include "retrostar/domains/htn.hpp"
#include "retrostar/domains/route_dataset.hpp"
#include "retrostar/expansion.hpp"
#include "retrostar/search.hpp"
#include "retrostar/tree.hpp"
#include "retrostar/value_model.hpp"

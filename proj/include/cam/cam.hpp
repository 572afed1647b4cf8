#pragma once

#include "cam/baselines.hpp"
#include "cam/diffusion.hpp"
#include "cam/error.hpp"
#include "cam/exact_oracle.hpp"
#include "cam/experiment.hpp"
#include "cam/generators.hpp"
#include "cam/graph.hpp"
#include "cam/greedy.hpp"
#include "cam/imm.hpp"
#include "cam/rng.hpp"
#include "cam/sampling.hpp"
#include "cam/sandwich.hpp"
#include "cam/strategy.hpp"

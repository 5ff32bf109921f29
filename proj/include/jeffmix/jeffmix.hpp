#pragma once

// Umbrella header.

#include "jeffmix/bridge.hpp"
#include "jeffmix/datasets.hpp"
#include "jeffmix/experiments.hpp"
#include "jeffmix/fisher.hpp"
#include "jeffmix/hierarchical.hpp"
#include "jeffmix/io.hpp"
#include "jeffmix/jeffreys.hpp"
#include "jeffmix/mcmc.hpp"
#include "jeffmix/mixture.hpp"
#include "jeffmix/posterior.hpp"
#include "jeffmix/reparam.hpp"

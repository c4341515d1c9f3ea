#pragma once

#include "preflab/core.hpp"
#include "preflab/datagen.hpp"
#include "preflab/experiments.hpp"
#include "preflab/gumbel.hpp"
#include "preflab/io.hpp"
#include "preflab/losses.hpp"
#include "preflab/policy.hpp"
#include "preflab/rng.hpp"
#include "preflab/trainer.hpp"

#pragma once

// Umbrella header for the preference score library.

#include "prefscore/augment.hpp"
#include "prefscore/dataset.hpp"
#include "prefscore/error.hpp"
#include "prefscore/evaluation.hpp"
#include "prefscore/importance.hpp"
#include "prefscore/nn.hpp"
#include "prefscore/random.hpp"
#include "prefscore/rank_eval.hpp"
#include "prefscore/ranker.hpp"
#include "prefscore/schema.hpp"
#include "prefscore/synth.hpp"

#pragma once

// Umbrella header for the multitask structural-robustness laboratory.

#include "mtrob/analysis.hpp"
#include "mtrob/corruption.hpp"
#include "mtrob/csvio.hpp"
#include "mtrob/ensemble.hpp"
#include "mtrob/errors.hpp"
#include "mtrob/experiment.hpp"
#include "mtrob/idx.hpp"
#include "mtrob/learning.hpp"
#include "mtrob/linalg.hpp"
#include "mtrob/rng.hpp"
#include "mtrob/types.hpp"

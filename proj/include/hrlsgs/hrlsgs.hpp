#pragma once

#include "hrlsgs/errors.hpp"
#include "hrlsgs/rng.hpp"
#include "hrlsgs/geometry.hpp"
#include "hrlsgs/operators.hpp"
#include "hrlsgs/image_io.hpp"
#include "hrlsgs/priors.hpp"
#include "hrlsgs/parallel.hpp"
#include "hrlsgs/sampler.hpp"
#include "hrlsgs/diagnostics.hpp"
#include "hrlsgs/stats.hpp"
#include "hrlsgs/validation.hpp"
#include "hrlsgs/experiments.hpp"

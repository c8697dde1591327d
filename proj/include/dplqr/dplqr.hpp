#pragma once

#include "commands.hpp"
#include "densemath.hpp"
#include "dgp.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "inference.hpp"
#include "io.hpp"
#include "model.hpp"
#include "network.hpp"
#include "optimizer.hpp"
#include "parallel.hpp"
#include "quantile_loss.hpp"
#include "rng.hpp"
#include "tuning.hpp"

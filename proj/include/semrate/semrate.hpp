#pragma once

#include "semrate/config.hpp"
#include "semrate/controllers.hpp"
#include "semrate/csv.hpp"
#include "semrate/error_model.hpp"
#include "semrate/errors.hpp"
#include "semrate/frontier.hpp"
#include "semrate/metrics.hpp"
#include "semrate/parallel.hpp"
#include "semrate/rng.hpp"
#include "semrate/sim_engine.hpp"
#include "semrate/validate.hpp"

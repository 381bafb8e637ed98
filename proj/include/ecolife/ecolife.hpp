#pragma once

// Core library. config.hpp (command-line handling) is separate and needs CLI11.

#include "ecolife/baselines.hpp"
#include "ecolife/carbon_model.hpp"
#include "ecolife/dpso.hpp"
#include "ecolife/errors.hpp"
#include "ecolife/function_profile.hpp"
#include "ecolife/generation.hpp"
#include "ecolife/objective.hpp"
#include "ecolife/policy.hpp"
#include "ecolife/report.hpp"
#include "ecolife/scenario.hpp"
#include "ecolife/scheduler.hpp"
#include "ecolife/sim_engine.hpp"
#include "ecolife/warm_pool.hpp"
#include "ecolife/workload.hpp"

#pragma once

#include "amplify.hpp"
#include "config.hpp"
#include "decay.hpp"
#include "error.hpp"
#include "inequality.hpp"
#include "mann_whitney.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "pipeline.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "simkit.hpp"
#include "store.hpp"

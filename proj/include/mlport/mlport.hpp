#pragma once

#include "mlport/core.hpp"
#include "mlport/estimators.hpp"
#include "mlport/experiments.hpp"
#include "mlport/io.hpp"
#include "mlport/model_selection.hpp"
#include "mlport/risk.hpp"
#include "mlport/sampling.hpp"
#include "mlport/strategy.hpp"

#pragma once

#include "mlport/estimators/benchmarks.hpp"
#include "mlport/estimators/lasso.hpp"
#include "mlport/estimators/pcr.hpp"
#include "mlport/estimators/regression.hpp"
#include "mlport/estimators/spike_slab.hpp"

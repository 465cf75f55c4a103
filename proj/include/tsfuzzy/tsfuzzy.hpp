#pragma once

// Takagi-Sugeno fuzzy rainfall-runoff modelling: clustering, validity,
// identification, metrics, data handling and the experiment driver.

#include "tsfuzzy/clustering.hpp"
#include "tsfuzzy/core.hpp"
#include "tsfuzzy/dataio.hpp"
#include "tsfuzzy/error.hpp"
#include "tsfuzzy/experiment.hpp"
#include "tsfuzzy/identify.hpp"
#include "tsfuzzy/metrics.hpp"
#include "tsfuzzy/model_io.hpp"
#include "tsfuzzy/validity.hpp"

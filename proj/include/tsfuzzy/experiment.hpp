#pragma once

#include "tsfuzzy/experiment/commands.hpp"
#include "tsfuzzy/experiment/config.hpp"
#include "tsfuzzy/experiment/output.hpp"

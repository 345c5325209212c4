#pragma once

#include "eulerlab/diagnostics/common.hpp"
#include "eulerlab/diagnostics/convergence.hpp"
#include "eulerlab/diagnostics/density.hpp"
#include "eulerlab/diagnostics/exit_time.hpp"
#include "eulerlab/diagnostics/moments.hpp"
#include "eulerlab/diagnostics/report.hpp"

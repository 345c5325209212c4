#pragma once

#include "eulerlab/io/config.hpp"
#include "eulerlab/io/experiment.hpp"
#include "eulerlab/io/json_field.hpp"
#include "eulerlab/io/presets.hpp"
#include "eulerlab/io/report_io.hpp"

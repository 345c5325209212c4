#pragma once

#include "eulerlab/checkers/checks.hpp"
#include "eulerlab/checkers/sampling.hpp"
#include "eulerlab/checkers/verdict.hpp"

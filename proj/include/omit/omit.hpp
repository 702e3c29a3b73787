#pragma once

#include "omit/constants.hpp"
#include "omit/error.hpp"
#include "omit/params.hpp"
#include "omit/steadystate.hpp"
#include "omit/spectrum.hpp"
#include "omit/analysis.hpp"

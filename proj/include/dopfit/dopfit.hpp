#pragma once

#include "dopfit/error.hpp"
#include "dopfit/grid.hpp"
#include "dopfit/weights.hpp"
#include "dopfit/basis.hpp"
#include "dopfit/fit.hpp"
#include "dopfit/baseline.hpp"
#include "dopfit/quality.hpp"
#include "dopfit/synthetic.hpp"
#include "dopfit/io.hpp"

#pragma once

#include "quadrature.hpp"
#include "banded.hpp"
#include "lagrange.hpp"
#include "assembly.hpp"
#include "special.hpp"
#include "benchmarks.hpp"
#include "timestepping.hpp"
#include "cfl.hpp"
#include "stability.hpp"
#include "reconstruct.hpp"
#include "damped.hpp"
#include "estimator.hpp"
#include "pipeline.hpp"
#include "harness.hpp"

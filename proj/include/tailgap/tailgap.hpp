#pragma once

#include "tailgap/errors.hpp"
#include "tailgap/special.hpp"
#include "tailgap/quadrature.hpp"
#include "tailgap/random.hpp"
#include "tailgap/distributions.hpp"
#include "tailgap/payoffs.hpp"
#include "tailgap/conflation.hpp"
#include "tailgap/scoring.hpp"
#include "tailgap/simulate.hpp"
#include "tailgap/io.hpp"

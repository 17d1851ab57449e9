#pragma once

#include "orient/angle.hpp"
#include "orient/dataset.hpp"
#include "orient/density.hpp"
#include "orient/density_io.hpp"
#include "orient/eval.hpp"
#include "orient/grid_io.hpp"
#include "orient/pgm.hpp"
#include "orient/priors.hpp"
#include "orient/radar.hpp"
#include "orient/synthetic.hpp"
#include "orient/text.hpp"

#pragma once

#include "thav/calibration.hpp"
#include "thav/diagnostics.hpp"
#include "thav/edge_set.hpp"
#include "thav/error.hpp"
#include "thav/experiment.hpp"
#include "thav/glasso.hpp"
#include "thav/io.hpp"
#include "thav/matrix.hpp"
#include "thav/metrics.hpp"
#include "thav/rng.hpp"
#include "thav/synthetic.hpp"

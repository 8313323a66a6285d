#pragma once

// Umbrella header for the fuse centrality library.

#include "fuse/adam.hpp"
#include "fuse/common.hpp"
#include "fuse/csv.hpp"
#include "fuse/data.hpp"
#include "fuse/depths.hpp"
#include "fuse/dissimilarity.hpp"
#include "fuse/inference.hpp"
#include "fuse/matrix.hpp"
#include "fuse/metrics.hpp"
#include "fuse/model_io.hpp"
#include "fuse/network.hpp"
#include "fuse/outlier_bench.hpp"
#include "fuse/rng.hpp"
#include "fuse/sampling.hpp"
#include "fuse/training.hpp"

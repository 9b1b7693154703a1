#pragma once

/// Umbrella header for the mfwave library.

#include "mfwave/acceptance.hpp"
#include "mfwave/empirical_cdf.hpp"
#include "mfwave/error.hpp"
#include "mfwave/flux.hpp"
#include "mfwave/frame_solver.hpp"
#include "mfwave/grid_cdf.hpp"
#include "mfwave/io.hpp"
#include "mfwave/jump_kernel.hpp"
#include "mfwave/kernels.hpp"
#include "mfwave/meanfield.hpp"
#include "mfwave/model.hpp"
#include "mfwave/order_statistic_tree.hpp"
#include "mfwave/particle_sim.hpp"
#include "mfwave/rate_curve.hpp"
#include "mfwave/rng.hpp"
#include "mfwave/wave.hpp"

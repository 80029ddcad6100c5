#pragma once

#include "aprkit/apr.hpp"
#include "aprkit/bench.hpp"
#include "aprkit/build.hpp"
#include "aprkit/convolve.hpp"
#include "aprkit/deconv.hpp"
#include "aprkit/errors.hpp"
#include "aprkit/io.hpp"
#include "aprkit/linear_access.hpp"
#include "aprkit/metrics.hpp"
#include "aprkit/parallel.hpp"
#include "aprkit/pixel_volume.hpp"
#include "aprkit/reconstruct.hpp"
#include "aprkit/rng.hpp"
#include "aprkit/stencil.hpp"
#include "aprkit/synthetic.hpp"
#include "aprkit/tree.hpp"

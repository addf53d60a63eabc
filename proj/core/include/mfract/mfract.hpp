#pragma once

#include "mfract/boxcount.hpp"
#include "mfract/density.hpp"
#include "mfract/diffusion.hpp"
#include "mfract/grid.hpp"
#include "mfract/grouping.hpp"
#include "mfract/image.hpp"
#include "mfract/mfspec.hpp"
#include "mfract/parallel.hpp"
#include "mfract/random.hpp"
#include "mfract/regression.hpp"
#include "mfract/spectral.hpp"
#include "mfract/version.hpp"

#pragma once

#include "anglekit/constraints.hpp"
#include "anglekit/denoise.hpp"
#include "anglekit/errors.hpp"
#include "anglekit/experiments.hpp"
#include "anglekit/geometry.hpp"
#include "anglekit/io.hpp"
#include "anglekit/learned.hpp"
#include "anglekit/reconstruct.hpp"
#include "anglekit/rng.hpp"
#include "anglekit/svg.hpp"

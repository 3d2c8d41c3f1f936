#pragma once

#include "kfusion/numerics.hpp"
#include "kfusion/subspace.hpp"
#include "kfusion/fusion_system.hpp"
#include "kfusion/frames.hpp"
#include "kfusion/factorization.hpp"
#include "kfusion/duality.hpp"
#include "kfusion/resolution.hpp"
#include "kfusion/perturbation.hpp"
#include "kfusion/random.hpp"

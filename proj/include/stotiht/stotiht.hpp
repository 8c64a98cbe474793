#pragma once

#include "stotiht/analysis.hpp"
#include "stotiht/hosvd.hpp"
#include "stotiht/random.hpp"
#include "stotiht/sensing.hpp"
#include "stotiht/solvers.hpp"
#include "stotiht/tensor.hpp"
#include "stotiht/tensor_io.hpp"

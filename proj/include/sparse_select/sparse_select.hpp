#pragma once

#include "sparse_select/extremal.hpp"
#include "sparse_select/function_space.hpp"
#include "sparse_select/math_util.hpp"
#include "sparse_select/parallel.hpp"
#include "sparse_select/risk_lab.hpp"
#include "sparse_select/rng.hpp"
#include "sparse_select/selectors.hpp"
#include "sparse_select/signal_model.hpp"
#include "sparse_select/version.hpp"

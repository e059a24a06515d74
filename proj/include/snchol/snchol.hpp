#pragma once

#include "snchol/bench.hpp"
#include "snchol/factorize.hpp"
#include "snchol/heuristics.hpp"
#include "snchol/kernels.hpp"
#include "snchol/matrix_market.hpp"
#include "snchol/ordering.hpp"
#include "snchol/solve.hpp"
#include "snchol/sparse.hpp"
#include "snchol/symbolic.hpp"
#include "snchol/thread_pool.hpp"

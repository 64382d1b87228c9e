#ifndef MGK_MGK_HPP
#define MGK_MGK_HPP

#include "mgk/counters.hpp"
#include "mgk/generators.hpp"
#include "mgk/gram.hpp"
#include "mgk/graph.hpp"
#include "mgk/io.hpp"
#include "mgk/kernels.hpp"
#include "mgk/oracle.hpp"
#include "mgk/product_operator.hpp"
#include "mgk/random.hpp"
#include "mgk/reorder.hpp"
#include "mgk/solver.hpp"
#include "mgk/tiles.hpp"

#endif  // MGK_MGK_HPP

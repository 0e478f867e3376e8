#pragma once

#include "qpoly/clopper_pearson.hpp"
#include "qpoly/coverage.hpp"
#include "qpoly/credibility.hpp"
#include "qpoly/error.hpp"
#include "qpoly/figures_of_merit.hpp"
#include "qpoly/geometry.hpp"
#include "qpoly/hash.hpp"
#include "qpoly/io.hpp"
#include "qpoly/lp.hpp"
#include "qpoly/mesh.hpp"
#include "qpoly/parallel.hpp"
#include "qpoly/polytope.hpp"
#include "qpoly/quantum_core.hpp"
#include "qpoly/random.hpp"
#include "qpoly/simulation.hpp"

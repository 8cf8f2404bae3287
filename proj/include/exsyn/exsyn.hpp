#pragma once

#include "bases.hpp"
#include "bench_io.hpp"
#include "benchgen.hpp"
#include "boolean_function.hpp"
#include "circuit.hpp"
#include "encoder.hpp"
#include "formula.hpp"
#include "gates.hpp"
#include "sat.hpp"
#include "solver.hpp"
#include "synthesis.hpp"

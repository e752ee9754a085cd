#pragma once

// umbrella header: the whole library in one include

#include "mgfe/channels.hpp"
#include "mgfe/clifford_algebra.hpp"
#include "mgfe/errors.hpp"
#include "mgfe/estimator.hpp"
#include "mgfe/euler.hpp"
#include "mgfe/io.hpp"
#include "mgfe/matchgate.hpp"
#include "mgfe/pauli.hpp"
#include "mgfe/rng.hpp"
#include "mgfe/rotation.hpp"
#include "mgfe/simulator.hpp"
#include "mgfe/stabilizer.hpp"
#include "mgfe/subsets.hpp"
#include "mgfe/superoperator.hpp"
#include "mgfe/tomography.hpp"

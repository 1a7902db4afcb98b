#ifndef FISSIONLAB_FISSIONLAB_HPP
#define FISSIONLAB_FISSIONLAB_HPP

#include "fissionlab/cluster.hpp"
#include "fissionlab/decompose.hpp"
#include "fissionlab/errors.hpp"
#include "fissionlab/estimate.hpp"
#include "fissionlab/harness.hpp"
#include "fissionlab/io.hpp"
#include "fissionlab/matrix.hpp"
#include "fissionlab/rng.hpp"
#include "fissionlab/samplers.hpp"
#include "fissionlab/special.hpp"
#include "fissionlab/stattest.hpp"
#include "fissionlab/theory.hpp"

#endif

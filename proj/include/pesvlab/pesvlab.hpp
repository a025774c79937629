#ifndef PESVLAB_PESVLAB_HPP
#define PESVLAB_PESVLAB_HPP

#include "activation.hpp"
#include "data.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "loss.hpp"
#include "matrix.hpp"
#include "network.hpp"
#include "norms.hpp"
#include "serialization.hpp"
#include "theory.hpp"
#include "train.hpp"
#include "transforms.hpp"
#include "width_vector.hpp"

#include "oracles/combinatorics.hpp"
#include "oracles/cones.hpp"
#include "oracles/covering.hpp"
#include "oracles/equivalence.hpp"
#include "oracles/maurey.hpp"
#include "oracles/pointwise.hpp"
#include "oracles/rademacher.hpp"
#include "oracles/report.hpp"
#include "oracles/suites.hpp"

#endif // PESVLAB_PESVLAB_HPP

#pragma once

#include "overlap_ifs/chain_counter.hpp"
#include "overlap_ifs/errors.hpp"
#include "overlap_ifs/ifs_core.hpp"
#include "overlap_ifs/overlap_estimator.hpp"
#include "overlap_ifs/philox.hpp"
#include "overlap_ifs/pressure_dimension.hpp"
#include "overlap_ifs/symbolic_measure.hpp"

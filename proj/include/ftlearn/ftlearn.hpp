#pragma once

// Umbrella header: fault tree learning from mixed continuous/Boolean
// tabular data, via per-sensor threshold discretization and greedy
// phi-scored gate construction.

#include "ftlearn/bool_column.hpp"
#include "ftlearn/dataset.hpp"
#include "ftlearn/errors.hpp"
#include "ftlearn/fault_tree.hpp"
#include "ftlearn/ingest.hpp"
#include "ftlearn/learner.hpp"
#include "ftlearn/schema.hpp"
#include "ftlearn/serialize.hpp"
#include "ftlearn/significance.hpp"
#include "ftlearn/synthetic.hpp"
#include "ftlearn/threshold.hpp"
#include "ftlearn/version.hpp"

#pragma once

#include "ntklab/drift_study.hpp"
#include "ntklab/invariant.hpp"
#include "ntklab/network.hpp"
#include "ntklab/ntk_limit.hpp"
#include "ntklab/quasirandom.hpp"
#include "ntklab/rng.hpp"
#include "ntklab/synth_data.hpp"
#include "ntklab/tensor_ops.hpp"
#include "ntklab/trainer.hpp"

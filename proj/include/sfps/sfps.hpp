#pragma once

#include "sfps/core.hpp"
#include "sfps/estimator/estimator.hpp"
#include "sfps/estimator/feature.hpp"
#include "sfps/estimator/snapshot.hpp"
#include "sfps/harness/config_io.hpp"
#include "sfps/harness/experiment.hpp"
#include "sfps/harness/export.hpp"
#include "sfps/harness/parallel.hpp"
#include "sfps/harness/pareto.hpp"
#include "sfps/harness/stats.hpp"
#include "sfps/ml/activation.hpp"
#include "sfps/ml/dataset.hpp"
#include "sfps/ml/knn.hpp"
#include "sfps/ml/mlp.hpp"
#include "sfps/ml/replay_buffer.hpp"
#include "sfps/rules/rules.hpp"
#include "sfps/world/config.hpp"
#include "sfps/world/simulation.hpp"
#include "sfps/world/world.hpp"

/**
 * @file ffd.hpp
 * @brief Umbrella header.
 */
#pragma once

#include "ffd/community.hpp"
#include "ffd/embedding.hpp"
#include "ffd/experiment.hpp"
#include "ffd/features.hpp"
#include "ffd/graph.hpp"
#include "ffd/heuristics.hpp"
#include "ffd/line_graph.hpp"
#include "ffd/metrics.hpp"
#include "ffd/model.hpp"
#include "ffd/pipeline.hpp"
#include "ffd/rng.hpp"
#include "ffd/sbm.hpp"
#include "ffd/split.hpp"

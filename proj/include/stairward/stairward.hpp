#pragma once

#include "stairward/benchmark.hpp"
#include "stairward/core.hpp"
#include "stairward/correlation.hpp"
#include "stairward/csv.hpp"
#include "stairward/dataset_io.hpp"
#include "stairward/external_scorer.hpp"
#include "stairward/image_codec.hpp"
#include "stairward/logistic.hpp"
#include "stairward/mos.hpp"
#include "stairward/prompt_seg.hpp"
#include "stairward/scorer.hpp"
#include "stairward/scorer_factory.hpp"
#include "stairward/split.hpp"
#include "stairward/stair_crop.hpp"
#include "stairward/stair_reward.hpp"

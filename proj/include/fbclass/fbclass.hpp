// SPDX-License-Identifier: Apache-2.0
#ifndef FBCLASS_FBCLASS_HPP
#define FBCLASS_FBCLASS_HPP

#include "numerics.hpp"
#include "corpus.hpp"
#include "layers.hpp"
#include "models.hpp"
#include "checkpoint.hpp"
#include "training.hpp"
#include "evaluation.hpp"
#include "model_store.hpp"
#include "pipeline.hpp"

#endif // FBCLASS_FBCLASS_HPP

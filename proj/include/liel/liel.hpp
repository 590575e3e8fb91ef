#pragma once

#include "liel/config.hpp"
#include "liel/decode.hpp"
#include "liel/document.hpp"
#include "liel/error.hpp"
#include "liel/eval_io.hpp"
#include "liel/evaluator.hpp"
#include "liel/features.hpp"
#include "liel/kb_store.hpp"
#include "liel/lbfgs.hpp"
#include "liel/maxent.hpp"
#include "liel/segmenter.hpp"
#include "liel/text_vsm.hpp"

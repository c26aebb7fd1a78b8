#pragma once

#include "reqsmell/balance.hpp"
#include "reqsmell/config.hpp"
#include "reqsmell/corpus.hpp"
#include "reqsmell/eval.hpp"
#include "reqsmell/features.hpp"
#include "reqsmell/lexic.hpp"
#include "reqsmell/models.hpp"
#include "reqsmell/smells.hpp"
#include "reqsmell/taxonomy.hpp"

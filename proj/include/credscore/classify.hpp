#pragma once

#include "credscore/classify/forest.hpp"
#include "credscore/classify/hybrid.hpp"
#include "credscore/classify/knn.hpp"
#include "credscore/classify/model.hpp"
#include "credscore/classify/model_selection.hpp"
#include "credscore/classify/naive_bayes.hpp"
#include "credscore/classify/train.hpp"
#include "credscore/classify/tree.hpp"

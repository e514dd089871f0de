#pragma once

#include "entwit/datagen.hpp"
#include "entwit/dataset_io.hpp"
#include "entwit/features.hpp"
#include "entwit/ghz_w_tangle.hpp"
#include "entwit/hash.hpp"
#include "entwit/measures.hpp"
#include "entwit/qsim.hpp"
#include "entwit/qstate.hpp"
#include "entwit/rng.hpp"
#include "entwit/svm.hpp"
#include "entwit/svm_io.hpp"
#include "entwit/witness.hpp"

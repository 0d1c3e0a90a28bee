#pragma once

// Umbrella header for the grail toolkit.

#include "grail/adamw.hpp"
#include "grail/common.hpp"
#include "grail/config.hpp"
#include "grail/crf.hpp"
#include "grail/data.hpp"
#include "grail/ee.hpp"
#include "grail/encoder.hpp"
#include "grail/finite_diff.hpp"
#include "grail/gradcheck.hpp"
#include "grail/gradient_imitation.hpp"
#include "grail/heads.hpp"
#include "grail/math.hpp"
#include "grail/ner.hpp"
#include "grail/parameters.hpp"
#include "grail/pca.hpp"
#include "grail/re.hpp"
#include "grail/runner.hpp"
#include "grail/vocab.hpp"

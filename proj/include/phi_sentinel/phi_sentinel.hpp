#pragma once

#include "phi_sentinel/datetime.hpp"
#include "phi_sentinel/error.hpp"
#include "phi_sentinel/explain.hpp"
#include "phi_sentinel/folds.hpp"
#include "phi_sentinel/gbt.hpp"
#include "phi_sentinel/ingest.hpp"
#include "phi_sentinel/metafeatures.hpp"
#include "phi_sentinel/metrics.hpp"
#include "phi_sentinel/parallel.hpp"
#include "phi_sentinel/pipeline.hpp"
#include "phi_sentinel/random.hpp"
#include "phi_sentinel/regex_screen.hpp"
#include "phi_sentinel/synthgen.hpp"
#include "phi_sentinel/version.hpp"

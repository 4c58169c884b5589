#pragma once

// Umbrella header for the divergence-based dataset fusion library.

#include "divfuse/csv_record.hpp"
#include "divfuse/distribution.hpp"
#include "divfuse/error.hpp"
#include "divfuse/experiment.hpp"
#include "divfuse/feature_matrix.hpp"
#include "divfuse/features.hpp"
#include "divfuse/fft.hpp"
#include "divfuse/fusion.hpp"
#include "divfuse/gbdt.hpp"
#include "divfuse/kde.hpp"
#include "divfuse/manifest.hpp"
#include "divfuse/metrics.hpp"
#include "divfuse/parallel.hpp"
#include "divfuse/pipeline.hpp"
#include "divfuse/preprocess.hpp"
#include "divfuse/record.hpp"
#include "divfuse/rng.hpp"
#include "divfuse/stats.hpp"
#include "divfuse/svg.hpp"
#include "divfuse/synth.hpp"
#include "divfuse/wfdb.hpp"

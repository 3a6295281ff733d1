#pragma once

#include "lmm/error.hpp"
#include "lmm/core_model.hpp"
#include "lmm/dynamics.hpp"
#include "lmm/random.hpp"
#include "lmm/signal_synth.hpp"
#include "lmm/zfm.hpp"
#include "lmm/kinematics.hpp"
#include "lmm/event_analysis.hpp"
#include "lmm/kv_fit.hpp"
#include "lmm/uncertainty.hpp"
#include "lmm/io/format.hpp"
#include "lmm/io/csv.hpp"
#include "lmm/io/waveform_file.hpp"
#include "lmm/io/results_json.hpp"
#include "lmm/config.hpp"
#include "lmm/pipeline.hpp"
#include "lmm/campaign.hpp"

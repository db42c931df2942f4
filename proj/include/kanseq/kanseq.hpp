#pragma once

// Umbrella header: the whole library.

#include "kanseq/activations.hpp"
#include "kanseq/batch_norm.hpp"
#include "kanseq/bspline.hpp"
#include "kanseq/cells.hpp"
#include "kanseq/config.hpp"
#include "kanseq/dense.hpp"
#include "kanseq/experiment.hpp"
#include "kanseq/features.hpp"
#include "kanseq/gradcheck.hpp"
#include "kanseq/kan_layer.hpp"
#include "kanseq/loan_records.hpp"
#include "kanseq/loss.hpp"
#include "kanseq/masked_batch.hpp"
#include "kanseq/matrix.hpp"
#include "kanseq/metrics.hpp"
#include "kanseq/model.hpp"
#include "kanseq/model_io.hpp"
#include "kanseq/optimizer.hpp"
#include "kanseq/reports.hpp"
#include "kanseq/rng.hpp"
#include "kanseq/sampling.hpp"
#include "kanseq/samples_io.hpp"
#include "kanseq/synth.hpp"
#include "kanseq/train.hpp"
#include "kanseq/version.hpp"
#include "kanseq/windows.hpp"

#pragma once

// Distance-based classification for high-dimension, low-sample-size data
// with strongly spiked covariance structure. Everything is header-only;
// include this to get the full library.

#include "spike/common.hpp"
#include "spike/rng.hpp"
#include "spike/class_sample.hpp"
#include "spike/spectra.hpp"
#include "spike/pc_scores.hpp"
#include "spike/classifiers.hpp"
#include "spike/structured_cov.hpp"
#include "spike/simgen.hpp"
#include "spike/dataset.hpp"
#include "spike/thread_pool.hpp"
#include "spike/montecarlo.hpp"
#include "spike/loocv.hpp"
#include "spike/spectra_report.hpp"
#include "spike/report.hpp"

#pragma once

#include "seqdevid/capture.hpp"
#include "seqdevid/error.hpp"
#include "seqdevid/experiment.hpp"
#include "seqdevid/features.hpp"
#include "seqdevid/models.hpp"
#include "seqdevid/nn/adam.hpp"
#include "seqdevid/nn/conv.hpp"
#include "seqdevid/nn/dense.hpp"
#include "seqdevid/nn/gradcheck.hpp"
#include "seqdevid/nn/gru.hpp"
#include "seqdevid/nn/lstm.hpp"
#include "seqdevid/nn/params.hpp"
#include "seqdevid/stats.hpp"

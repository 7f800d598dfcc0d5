#pragma once

#include "tidepool/csv.hpp"
#include "tidepool/date.hpp"
#include "tidepool/error.hpp"
#include "tidepool/features.hpp"
#include "tidepool/ingest.hpp"
#include "tidepool/net/adam.hpp"
#include "tidepool/net/loss.hpp"
#include "tidepool/net/lstm.hpp"
#include "tidepool/net/model.hpp"
#include "tidepool/net/rng.hpp"
#include "tidepool/net/serialize.hpp"
#include "tidepool/plot.hpp"
#include "tidepool/sentiment.hpp"
#include "tidepool/textprep.hpp"
#include "tidepool/train_eval.hpp"

#pragma once

#include "covchan/cache_model.hpp"
#include "covchan/channel_codec.hpp"
#include "covchan/config.hpp"
#include "covchan/error.hpp"
#include "covchan/params.hpp"
#include "covchan/report.hpp"
#include "covchan/sim_engine.hpp"
#include "covchan/timing_model.hpp"

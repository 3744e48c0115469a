#pragma once

#include "tpvm/covert.hpp"
#include "tpvm/error.hpp"
#include "tpvm/fusion.hpp"
#include "tpvm/image.hpp"
#include "tpvm/io/bundle.hpp"
#include "tpvm/io/netpbm.hpp"
#include "tpvm/io/ui_export.hpp"
#include "tpvm/masks.hpp"
#include "tpvm/metrics.hpp"
#include "tpvm/nmf.hpp"
#include "tpvm/random.hpp"
#include "tpvm/spatial_mask.hpp"

#pragma once

#include "angcorr/corr_models.hpp"
#include "angcorr/csv_io.hpp"
#include "angcorr/errors.hpp"
#include "angcorr/peak_analysis.hpp"
#include "angcorr/quadrature.hpp"
#include "angcorr/special.hpp"
#include "angcorr/toy_disks_analytic.hpp"
#include "angcorr/toy_disks_mc.hpp"
#include "angcorr/transforms.hpp"
#include "angcorr/types.hpp"
#include "angcorr/units.hpp"

namespace angcorr {

inline constexpr const char* version = "0.1.0";

}  // namespace angcorr

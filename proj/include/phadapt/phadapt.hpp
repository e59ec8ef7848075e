#pragma once

#include "phadapt/adjoint.hpp"
#include "phadapt/driver.hpp"
#include "phadapt/errors.hpp"
#include "phadapt/estimator.hpp"
#include "phadapt/forward.hpp"
#include "phadapt/numerics.hpp"
#include "phadapt/parallel.hpp"
#include "phadapt/ph_core.hpp"
#include "phadapt/presets.hpp"
#include "phadapt/qoi.hpp"

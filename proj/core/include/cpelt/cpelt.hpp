#pragma once

#include "cpelt/eltest.hpp"
#include "cpelt/epidemic.hpp"
#include "cpelt/errors.hpp"
#include "cpelt/estimation.hpp"
#include "cpelt/lsbaseline.hpp"
#include "cpelt/metric.hpp"
#include "cpelt/model.hpp"
#include "cpelt/owen.hpp"
#include "cpelt/parallel.hpp"
#include "cpelt/profile_el.hpp"
#include "cpelt/random.hpp"
#include "cpelt/simlab.hpp"

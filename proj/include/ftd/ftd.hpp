#pragma once

#include "ftd/error.hpp"
#include "ftd/delay.hpp"
#include "ftd/history.hpp"
#include "ftd/integrator.hpp"
#include "ftd/controllers.hpp"
#include "ftd/conditions.hpp"
#include "ftd/network.hpp"
#include "ftd/monitors.hpp"
#include "ftd/experiments.hpp"
#include "ftd/csv.hpp"
#include "ftd/config.hpp"

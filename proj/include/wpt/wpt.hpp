#pragma once

#include "wpt/circuit.hpp"
#include "wpt/config.hpp"
#include "wpt/controller.hpp"
#include "wpt/errors.hpp"
#include "wpt/estimation.hpp"
#include "wpt/experiments.hpp"
#include "wpt/transient.hpp"

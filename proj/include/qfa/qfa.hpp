#pragma once

#include "qfa/errors.hpp"
#include "qfa/polyrat.hpp"
#include "qfa/network.hpp"
#include "qfa/random.hpp"
#include "qfa/sensitivity.hpp"
#include "qfa/analysis.hpp"
#include "qfa/io.hpp"
#include "qfa/config.hpp"
#include "qfa/table.hpp"
#include "qfa/verify.hpp"
#include "qfa/commands.hpp"

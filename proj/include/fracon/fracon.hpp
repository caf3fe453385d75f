#pragma once

#include "fracon/bounds.hpp"
#include "fracon/error.hpp"
#include "fracon/fracsolve.hpp"
#include "fracon/freqcert.hpp"
#include "fracon/graph.hpp"
#include "fracon/model.hpp"
#include "fracon/scenario.hpp"

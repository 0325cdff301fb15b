#pragma once

#include "tqsim/channel.hpp"
#include "tqsim/metrology.hpp"
#include "tqsim/qmatrix.hpp"
#include "tqsim/resources.hpp"
#include "tqsim/specfun.hpp"
#include "tqsim/sweep.hpp"
#include "tqsim/teleport.hpp"
#include "tqsim/validate.hpp"
#include "tqsim/version.hpp"

#pragma once

#include "scorauc/errors.hpp"
#include "scorauc/numerics.hpp"
#include "scorauc/core.hpp"
#include "scorauc/scoring.hpp"
#include "scorauc/regularity.hpp"
#include "scorauc/breakeven.hpp"
#include "scorauc/classifier.hpp"
#include "scorauc/classes.hpp"
#include "scorauc/profile.hpp"
#include "scorauc/equilibrium.hpp"
#include "scorauc/simulator.hpp"
#include "scorauc/learning.hpp"

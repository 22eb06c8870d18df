#pragma once

#include "hapsris/allocator.hpp"
#include "hapsris/association.hpp"
#include "hapsris/channel.hpp"
#include "hapsris/config.hpp"
#include "hapsris/experiments.hpp"
#include "hapsris/gp.hpp"
#include "hapsris/report.hpp"
#include "hapsris/rng.hpp"
#include "hapsris/scenario.hpp"
#include "hapsris/units.hpp"

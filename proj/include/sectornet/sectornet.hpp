#pragma once

#include "sectornet/errors.hpp"
#include "sectornet/rng.hpp"
#include "sectornet/network.hpp"
#include "sectornet/sectorization.hpp"
#include "sectornet/auxgraph.hpp"
#include "sectornet/matching.hpp"
#include "sectornet/capacity.hpp"
#include "sectornet/optimizer.hpp"
#include "sectornet/backpressure.hpp"
#include "sectornet/experiments.hpp"
#include "sectornet/io.hpp"
#include "sectornet/chart.hpp"

#pragma once

#include "pitchfuse/attitude.hpp"
#include "pitchfuse/commands.hpp"
#include "pitchfuse/filters.hpp"
#include "pitchfuse/imu_sim.hpp"
#include "pitchfuse/io.hpp"

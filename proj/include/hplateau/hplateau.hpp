#pragma once

#include "hplateau/ambient_metric.hpp"
#include "hplateau/ball_area.hpp"
#include "hplateau/ball_model.hpp"
#include "hplateau/commands.hpp"
#include "hplateau/comparison_ode.hpp"
#include "hplateau/config.hpp"
#include "hplateau/disc_map.hpp"
#include "hplateau/disc_mesh.hpp"
#include "hplateau/expansion.hpp"
#include "hplateau/io.hpp"
#include "hplateau/lune_map.hpp"
#include "hplateau/plateau_solver.hpp"
#include "hplateau/verification.hpp"

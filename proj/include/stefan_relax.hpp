#pragma once

#include "stefan_relax/errors.hpp"
#include "stefan_relax/graphs.hpp"
#include "stefan_relax/mesh.hpp"
#include "stefan_relax/problem.hpp"
#include "stefan_relax/relaxed_solver.hpp"
#include "stefan_relax/stefan_solver.hpp"
#include "stefan_relax/analysis.hpp"
#include "stefan_relax/scenarios.hpp"
#include "stefan_relax/config.hpp"
#include "stefan_relax/io.hpp"
#include "stefan_relax/app.hpp"

#pragma once

// Core model, solvers and simulation. The CLI front end lives in cli.hpp and pulls in
// OpenSSL, CLI11 and nlohmann/json.
#include "model.hpp"
#include "portfolio.hpp"
#include "equilibrium.hpp"
#include "rng.hpp"
#include "dynamics.hpp"
#include "selffulfilling.hpp"

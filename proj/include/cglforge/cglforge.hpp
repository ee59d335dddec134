#pragma once

#include "amplitude.hpp"
#include "errors.hpp"
#include "evolve.hpp"
#include "expansion.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "model_json.hpp"
#include "models.hpp"
#include "multilinear.hpp"
#include "parallel.hpp"
#include "polynomial.hpp"
#include "report.hpp"
#include "selftest.hpp"
#include "spectral.hpp"
#include "turing.hpp"
#include "types.hpp"
#include "wave.hpp"

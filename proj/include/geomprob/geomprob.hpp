#pragma once

#include "geomprob/linalg.hpp"
#include "geomprob/exact.hpp"
#include "geomprob/random.hpp"
#include "geomprob/batch.hpp"
#include "geomprob/bodies.hpp"
#include "geomprob/sampling.hpp"
#include "geomprob/estimators.hpp"
#include "geomprob/derivatives.hpp"
#include "geomprob/symmetry2d.hpp"
#include "geomprob/body_json.hpp"
#include "geomprob/experiments.hpp"

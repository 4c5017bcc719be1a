#pragma once

#include "nlsnet/adjoint.hpp"
#include "nlsnet/coupled.hpp"
#include "nlsnet/dictionary.hpp"
#include "nlsnet/error.hpp"
#include "nlsnet/expression.hpp"
#include "nlsnet/fft.hpp"
#include "nlsnet/field.hpp"
#include "nlsnet/parallel.hpp"
#include "nlsnet/propagator.hpp"
#include "nlsnet/scenarios.hpp"
#include "nlsnet/trainer.hpp"

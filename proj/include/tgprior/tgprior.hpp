#pragma once

#include "errors.hpp"
#include "indexfn.hpp"
#include "spectra.hpp"
#include "truncation.hpp"
#include "posterior.hpp"
#include "modulus.hpp"
#include "harness.hpp"

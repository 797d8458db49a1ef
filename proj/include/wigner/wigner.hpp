#pragma once

#include "wigner/ensembles.hpp"
#include "wigner/error.hpp"
#include "wigner/experiments.hpp"
#include "wigner/fluctuations.hpp"
#include "wigner/kernel.hpp"
#include "wigner/matrix.hpp"
#include "wigner/quadrature.hpp"
#include "wigner/report.hpp"
#include "wigner/rng.hpp"
#include "wigner/semicircle.hpp"
#include "wigner/spectra.hpp"
#include "wigner/stats.hpp"
#include "wigner/version.hpp"

#pragma once

#include "cli.hpp"
#include "config.hpp"
#include "control.hpp"
#include "duality.hpp"
#include "errors.hpp"
#include "estimates.hpp"
#include "fft.hpp"
#include "lattice.hpp"
#include "multi_index.hpp"
#include "regimes.hpp"
#include "report.hpp"
#include "symbols.hpp"
#include "thickset.hpp"
#include "util.hpp"

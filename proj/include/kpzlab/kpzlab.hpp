#pragma once

// Umbrella header pulling in the whole toolkit.

#include <kpzlab/errors.hpp>
#include <kpzlab/grid.hpp>
#include <kpzlab/rng.hpp>
#include <kpzlab/parallel.hpp>
#include <kpzlab/ensemble.hpp>
#include <kpzlab/path.hpp>
#include <kpzlab/sampler.hpp>
#include <kpzlab/lpp.hpp>
#include <kpzlab/pitman.hpp>
#include <kpzlab/oracle.hpp>
#include <kpzlab/stats.hpp>
#include <kpzlab/sheet.hpp>
#include <kpzlab/kpz.hpp>
#include <kpzlab/io.hpp>
#include <kpzlab/verify.hpp>

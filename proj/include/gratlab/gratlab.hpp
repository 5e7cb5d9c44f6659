#pragma once

// Quasi-periodic Helmholtz scattering for perfectly conducting gratings:
// mode algebra and transparent (DtN) boundary closure, domain flattening,
// the transformed-rectangle solver, Karhunen-Loeve random surfaces, and the
// wavenumber-stability measurement harness.

#include "gratlab/boundary.hpp"
#include "gratlab/config.hpp"
#include "gratlab/errors.hpp"
#include "gratlab/io.hpp"
#include "gratlab/modes.hpp"
#include "gratlab/profile.hpp"
#include "gratlab/random_surface.hpp"
#include "gratlab/rng.hpp"
#include "gratlab/run.hpp"
#include "gratlab/solver.hpp"
#include "gratlab/stability.hpp"
#include "gratlab/transform.hpp"

#pragma once

#include "asymptotics.hpp"
#include "complex.hpp"
#include "errors.hpp"
#include "estimate.hpp"
#include "flow.hpp"
#include "generators.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "koenigs.hpp"
#include "ode.hpp"
#include "quadrature.hpp"
#include "reports.hpp"
#include "rigidity.hpp"
#include "version.hpp"

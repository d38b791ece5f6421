#pragma once

#include "ipsinv/scalar.hpp"
#include "ipsinv/core.hpp"
#include "ipsinv/numerics.hpp"
#include "ipsinv/criteria.hpp"
#include "ipsinv/search.hpp"
#include "ipsinv/oracle.hpp"
#include "ipsinv/lattice2d.hpp"
#include "ipsinv/segment.hpp"
#include "ipsinv/models.hpp"

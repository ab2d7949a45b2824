#pragma once

#include "clusep/assertion.hpp"
#include "clusep/bcl.hpp"
#include "clusep/gemenge.hpp"
#include "clusep/grid.hpp"
#include "clusep/hilbert.hpp"
#include "clusep/identicals.hpp"
#include "clusep/random.hpp"
#include "clusep/registration.hpp"
#include "clusep/separability.hpp"

#pragma once

#include "heegner/aj.hpp"
#include "heegner/arith.hpp"
#include "heegner/asym.hpp"
#include "heegner/errors.hpp"
#include "heegner/isogeny.hpp"
#include "heegner/modforms.hpp"
#include "heegner/numerics.hpp"
#include "heegner/periods.hpp"
#include "heegner/primes.hpp"
#include "heegner/quadfield.hpp"
#include "heegner/quadrature.hpp"

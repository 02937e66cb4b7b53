#pragma once

#include "boxop.hpp"
#include "errors.hpp"
#include "expr.hpp"
#include "form_index.hpp"
#include "hermite.hpp"
#include "kernel.hpp"
#include "linalg.hpp"
#include "quadrature.hpp"
#include "quadric.hpp"
#include "spectral.hpp"

#pragma once

#include "sphlab/errors.hpp"
#include "sphlab/sphere.hpp"
#include "sphlab/polynomial.hpp"
#include "sphlab/domain.hpp"
#include "sphlab/funcmodel.hpp"
#include "sphlab/parallel.hpp"
#include "sphlab/quadrature.hpp"
#include "sphlab/covering.hpp"
#include "sphlab/concentration.hpp"
#include "sphlab/bounds.hpp"
#include "sphlab/liouville.hpp"
#include "sphlab/io.hpp"

#pragma once

#include "ultraspec/diagonalize.hpp"
#include "ultraspec/errors.hpp"
#include "ultraspec/io.hpp"
#include "ultraspec/laurent.hpp"
#include "ultraspec/operator_c0.hpp"
#include "ultraspec/qlinalg.hpp"
#include "ultraspec/rational.hpp"
#include "ultraspec/rng.hpp"
#include "ultraspec/series_matrix.hpp"
#include "ultraspec/spectral.hpp"
#include "ultraspec/vector_c0.hpp"
#include "ultraspec/volumes.hpp"

#pragma once

#include "hypcert/error.hpp"
#include "hypcert/jet.hpp"
#include "hypcert/normal_forms.hpp"
#include "hypcert/parallel.hpp"
#include "hypcert/pipeline.hpp"
#include "hypcert/poly_symbol.hpp"
#include "hypcert/rational.hpp"
#include "hypcert/rational_matrix.hpp"
#include "hypcert/spectral.hpp"
#include "hypcert/symbol_file.hpp"
#include "hypcert/symbolic_core.hpp"
#include "hypcert/time_functions.hpp"
#include "hypcert/univariate.hpp"
#include "hypcert/verifier.hpp"

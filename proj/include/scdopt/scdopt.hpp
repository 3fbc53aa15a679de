#pragma once

#include "scdopt/error.hpp"
#include "scdopt/linalg.hpp"
#include "scdopt/sampling.hpp"
#include "scdopt/subspace.hpp"
#include "scdopt/simplex_qp.hpp"
#include "scdopt/ssderiv.hpp"
#include "scdopt/scdmap.hpp"
#include "scdopt/bundle.hpp"
#include "scdopt/verify.hpp"
#include "scdopt/problems.hpp"
#include "scdopt/report.hpp"
#include "scdopt/problem_file.hpp"

#pragma once

#include "pmirelax/bench_problems.hpp"
#include "pmirelax/certificate.hpp"
#include "pmirelax/cone.hpp"
#include "pmirelax/ipm.hpp"
#include "pmirelax/poly.hpp"
#include "pmirelax/poly_matrix.hpp"
#include "pmirelax/problem.hpp"
#include "pmirelax/problem_io.hpp"
#include "pmirelax/relax.hpp"
#include "pmirelax/rng.hpp"
#include "pmirelax/sdp.hpp"
#include "pmirelax/sdpa_io.hpp"
#include "pmirelax/sos.hpp"
#include "pmirelax/sparsity.hpp"

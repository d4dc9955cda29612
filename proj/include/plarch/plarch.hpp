#pragma once

#include "plarch/archetypes.hpp"
#include "plarch/cmeans.hpp"
#include "plarch/compare.hpp"
#include "plarch/csv.hpp"
#include "plarch/error.hpp"
#include "plarch/factorization.hpp"
#include "plarch/geometry.hpp"
#include "plarch/kmeans.hpp"
#include "plarch/matrix.hpp"
#include "plarch/nmf.hpp"
#include "plarch/pca.hpp"
#include "plarch/synthetic.hpp"
#include "plarch/telemetry.hpp"

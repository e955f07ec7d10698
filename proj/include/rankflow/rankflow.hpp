/**
 * Copyright (c) 2026 The rankflow Authors
 * Licensed under the Apache License, Version 2.0
 */

#pragma once

#include "rankflow/error.hpp"
#include "rankflow/parallel.hpp"
#include "rankflow/sparse.hpp"
#include "rankflow/rank_core.hpp"
#include "rankflow/normalize.hpp"
#include "rankflow/hypergraph.hpp"
#include "rankflow/cartesian.hpp"
#include "rankflow/components.hpp"
#include "rankflow/pipeline.hpp"
#include "rankflow/metrics.hpp"
#include "rankflow/features.hpp"
#include "rankflow/io.hpp"
#include "rankflow/index_io.hpp"

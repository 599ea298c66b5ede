#pragma once

#include "pgbj/artifacts.hpp"
#include "pgbj/bounds.hpp"
#include "pgbj/config.hpp"
#include "pgbj/datagen.hpp"
#include "pgbj/grouping.hpp"
#include "pgbj/io.hpp"
#include "pgbj/join_engine.hpp"
#include "pgbj/knn.hpp"
#include "pgbj/metric.hpp"
#include "pgbj/oracle.hpp"
#include "pgbj/partitioner.hpp"
#include "pgbj/pivots.hpp"
#include "pgbj/plan.hpp"

#pragma once

#include "dynmatch/core_graph.hpp"
#include "dynmatch/final_match.hpp"
#include "dynmatch/harness/replay.hpp"
#include "dynmatch/harness/stream.hpp"
#include "dynmatch/harness/validation.hpp"
#include "dynmatch/oracle/exact_matching.hpp"
#include "dynmatch/oracle/static_reference.hpp"
#include "dynmatch/oracle/validators.hpp"
#include "dynmatch/pipeline.hpp"
#include "dynmatch/rgmm.hpp"

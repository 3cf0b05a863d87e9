#pragma once

#include "config.hpp"
#include "oracle.hpp"
#include "query_stats.hpp"
#include "sequence.hpp"
#include "statistics.hpp"
#include "summation.hpp"
#include "value_traits.hpp"

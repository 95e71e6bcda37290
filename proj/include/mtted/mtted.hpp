#ifndef MTTED_MTTED_HPP
#define MTTED_MTTED_HPP

#include "mtted/cost.hpp"
#include "mtted/diagram.hpp"
#include "mtted/error.hpp"
#include "mtted/field.hpp"
#include "mtted/interval.hpp"
#include "mtted/matching.hpp"
#include "mtted/mergetree.hpp"
#include "mtted/oracle.hpp"
#include "mtted/pipeline.hpp"
#include "mtted/ted.hpp"

#endif

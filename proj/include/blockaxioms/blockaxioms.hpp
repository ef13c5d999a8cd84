#pragma once

#include "axiom_id.hpp"
#include "axioms.hpp"
#include "configuration.hpp"
#include "deviations.hpp"
#include "member_utility.hpp"
#include "rules.hpp"
#include "scalar.hpp"
#include "search.hpp"
#include "simulator.hpp"
#include "utility.hpp"

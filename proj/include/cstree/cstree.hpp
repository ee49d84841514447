#pragma once

#include "cstree/broom.hpp"
#include "cstree/conjugation.hpp"
#include "cstree/core.hpp"
#include "cstree/crossval.hpp"
#include "cstree/decider.hpp"
#include "cstree/families.hpp"
#include "cstree/io.hpp"
#include "cstree/shift.hpp"
#include "cstree/tree.hpp"

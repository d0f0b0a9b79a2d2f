#pragma once

#include "condense/adversaries.hpp"
#include "condense/bits.hpp"
#include "condense/checks.hpp"
#include "condense/condensers.hpp"
#include "condense/covering.hpp"
#include "condense/dist.hpp"
#include "condense/gf2m.hpp"
#include "condense/rational.hpp"
#include "condense/seeded_ext.hpp"
#include "condense/sources.hpp"

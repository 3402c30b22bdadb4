#pragma once

#include "revip/augmentation.hpp"
#include "revip/burke_field.hpp"
#include "revip/exact_discrete.hpp"
#include "revip/expr.hpp"
#include "revip/involutions.hpp"
#include "revip/kernels.hpp"
#include "revip/laws.hpp"
#include "revip/report.hpp"
#include "revip/rng.hpp"
#include "revip/skorokhod.hpp"
#include "revip/spaces.hpp"
#include "revip/special.hpp"
#include "revip/stat_tests.hpp"

#pragma once

#include "nlridge/families.hpp"
#include "nlridge/image.hpp"
#include "nlridge/oracle.hpp"
#include "nlridge/patch.hpp"
#include "nlridge/pipeline.hpp"
#include "nlridge/rng.hpp"
#include "nlridge/weights.hpp"

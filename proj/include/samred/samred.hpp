#pragma once

#include "samred/campaign.hpp"
#include "samred/core.hpp"
#include "samred/discretize.hpp"
#include "samred/generate.hpp"
#include "samred/io.hpp"
#include "samred/matops.hpp"
#include "samred/mm_ls.hpp"
#include "samred/mm_lti.hpp"
#include "samred/pipelines.hpp"
#include "samred/simulate.hpp"
#include "samred/stability.hpp"
#include "samred/systems.hpp"

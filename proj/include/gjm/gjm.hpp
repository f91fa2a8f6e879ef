#pragma once

#include "gjm/matqm.hpp"
#include "gjm/povm.hpp"
#include "gjm/gjm_sdp.hpp"
#include "gjm/sdpa.hpp"
#include "gjm/bounds.hpp"
#include "gjm/strategies.hpp"
#include "gjm/postsel.hpp"
#include "gjm/json_io.hpp"

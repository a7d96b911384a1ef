// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "topobc/bounds.hpp"
#include "topobc/channel.hpp"
#include "topobc/csv.hpp"
#include "topobc/dist_json.hpp"
#include "topobc/errors.hpp"
#include "topobc/harness.hpp"
#include "topobc/layered.hpp"
#include "topobc/quantizer.hpp"
#include "topobc/rational.hpp"
#include "topobc/rng.hpp"
#include "topobc/schemes.hpp"
#include "topobc/state_model.hpp"
#include "topobc/version.hpp"

#pragma once

#include "forge/accounting.hpp"
#include "forge/criticality.hpp"
#include "forge/equalization.hpp"
#include "forge/error.hpp"
#include "forge/network_ir.hpp"
#include "forge/pareto.hpp"
#include "forge/pi_cost.hpp"
#include "forge/serialize.hpp"
#include "forge/transforms.hpp"
#include "forge/units.hpp"

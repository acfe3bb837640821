#pragma once

#include "polcomp/jones.hpp"
#include "polcomp/error_model.hpp"
#include "polcomp/ecm.hpp"
#include "polcomp/tomography.hpp"
#include "polcomp/photon_sim.hpp"

#pragma once

#include "cmot/assignment.hpp"
#include "cmot/assoc_metrics.hpp"
#include "cmot/clearmot.hpp"
#include "cmot/core.hpp"
#include "cmot/descriptor_contract.hpp"
#include "cmot/error.hpp"
#include "cmot/gallery.hpp"
#include "cmot/gate_check.hpp"
#include "cmot/kalman.hpp"
#include "cmot/mot_io.hpp"
#include "cmot/render.hpp"
#include "cmot/track.hpp"
#include "cmot/tracker.hpp"

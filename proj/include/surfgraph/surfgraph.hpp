#pragma once

#include "analytics.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "gltf.hpp"
#include "horizon.hpp"
#include "layout.hpp"
#include "protocol.hpp"
#include "random.hpp"
#include "raster.hpp"
#include "responses.hpp"
#include "scene_io.hpp"

#pragma once

// Everything.

#include "polyrecon/alpha_shape.hpp"
#include "polyrecon/cell.hpp"
#include "polyrecon/config.hpp"
#include "polyrecon/convex_hull.hpp"
#include "polyrecon/debug_dump.hpp"
#include "polyrecon/delaunay.hpp"
#include "polyrecon/error.hpp"
#include "polyrecon/kdtree.hpp"
#include "polyrecon/max_flow.hpp"
#include "polyrecon/metrics.hpp"
#include "polyrecon/orient.hpp"
#include "polyrecon/partition.hpp"
#include "polyrecon/pipeline.hpp"
#include "polyrecon/plane.hpp"
#include "polyrecon/plane_detect.hpp"
#include "polyrecon/point_cloud.hpp"
#include "polyrecon/poly_mesh.hpp"
#include "polyrecon/polygon.hpp"
#include "polyrecon/predicates.hpp"
#include "polyrecon/vec.hpp"
#include "polyrecon/winding.hpp"

// Umbrella header.
#pragma once

#include "vem3d/analysis.hpp"
#include "vem3d/assembly.hpp"
#include "vem3d/elemvem.hpp"
#include "vem3d/errors.hpp"
#include "vem3d/experiment.hpp"
#include "vem3d/facevem.hpp"
#include "vem3d/mesh.hpp"
#include "vem3d/mesh_generators.hpp"
#include "vem3d/mesh_io.hpp"
#include "vem3d/parallel.hpp"
#include "vem3d/polybasis.hpp"
#include "vem3d/quadrature.hpp"

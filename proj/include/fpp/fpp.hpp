#pragma once

#include "fpp/busemann.hpp"
#include "fpp/campaign.hpp"
#include "fpp/coalescence_stats.hpp"
#include "fpp/distribution.hpp"
#include "fpp/domain.hpp"
#include "fpp/environment.hpp"
#include "fpp/errors.hpp"
#include "fpp/experiments.hpp"
#include "fpp/geodesic_graph.hpp"
#include "fpp/lattice.hpp"
#include "fpp/probes.hpp"
#include "fpp/serialize.hpp"
#include "fpp/shortest_path.hpp"
#include "fpp/svg.hpp"

#pragma once

#include "fpv/core.hpp"
#include "fpv/min1.hpp"
#include "fpv/orientation.hpp"
#include "fpv/pgm.hpp"
#include "fpv/som.hpp"
#include "fpv/cluster.hpp"
#include "fpv/graph.hpp"
#include "fpv/hausdorff.hpp"
#include "fpv/synth.hpp"
#include "fpv/store.hpp"
#include "fpv/eval.hpp"

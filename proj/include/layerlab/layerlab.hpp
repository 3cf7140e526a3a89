#pragma once

#include "layerlab/core.hpp"
#include "layerlab/green.hpp"
#include "layerlab/bounds.hpp"
#include "layerlab/reduced_wave.hpp"
#include "layerlab/perturbed.hpp"
#include "layerlab/fd_oracle.hpp"
#include "layerlab/cli.hpp"

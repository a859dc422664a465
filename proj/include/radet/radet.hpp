#pragma once

#include "radet/autoencoder.hpp"
#include "radet/benchmark.hpp"
#include "radet/cli.hpp"
#include "radet/config.hpp"
#include "radet/evaluation.hpp"
#include "radet/numeric.hpp"
#include "radet/pca.hpp"
#include "radet/serialize.hpp"
#include "radet/source.hpp"
#include "radet/transmission.hpp"

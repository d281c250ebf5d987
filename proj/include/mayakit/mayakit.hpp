#pragma once

#include "mayakit/augment.hpp"
#include "mayakit/dataset.hpp"
#include "mayakit/ensemble.hpp"
#include "mayakit/error.hpp"
#include "mayakit/evaluate.hpp"
#include "mayakit/fixtures.hpp"
#include "mayakit/parallel.hpp"
#include "mayakit/postprocess.hpp"
#include "mayakit/preprocess.hpp"
#include "mayakit/raster.hpp"
#include "mayakit/rng.hpp"
#include "mayakit/scan.hpp"
#include "mayakit/synthgen.hpp"
#include "mayakit/tiff.hpp"

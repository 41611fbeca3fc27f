#pragma once

#include "cuboidfit/anchor.hpp"
#include "cuboidfit/dataset.hpp"
#include "cuboidfit/error.hpp"
#include "cuboidfit/eval.hpp"
#include "cuboidfit/geometry.hpp"
#include "cuboidfit/io.hpp"
#include "cuboidfit/loss.hpp"
#include "cuboidfit/matching.hpp"
#include "cuboidfit/nelder_mead.hpp"
#include "cuboidfit/pipeline.hpp"
#include "cuboidfit/solver.hpp"
#include "cuboidfit/svg.hpp"

#ifndef HBUNDLE_HBUNDLE_HPP
#define HBUNDLE_HBUNDLE_HPP

#include "hbundle/bench.hpp"
#include "hbundle/binning.hpp"
#include "hbundle/bundler.hpp"
#include "hbundle/core.hpp"
#include "hbundle/graph_io.hpp"
#include "hbundle/raster.hpp"
#include "hbundle/render.hpp"

#endif // HBUNDLE_HBUNDLE_HPP

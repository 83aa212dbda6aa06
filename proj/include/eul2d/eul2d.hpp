#pragma once

// Everything, for tools and quick experiments.

#include "eul2d/field.hpp"
#include "eul2d/field_io.hpp"
#include "eul2d/norms.hpp"
#include "eul2d/operators.hpp"
#include "eul2d/sine_series.hpp"
#include "eul2d/sine_transform.hpp"
#include "eul2d/elliptic.hpp"
#include "eul2d/rng.hpp"
#include "eul2d/time_norm.hpp"
#include "eul2d/noise.hpp"
#include "eul2d/dynamics.hpp"
#include "eul2d/stats.hpp"
#include "eul2d/lab.hpp"
#include "eul2d/config.hpp"
#include "eul2d/manifest.hpp"
#include "eul2d/cli.hpp"
#include "eul2d/acceptance.hpp"

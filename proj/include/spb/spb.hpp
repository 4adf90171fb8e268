#pragma once

#include "spb/types.hpp"
#include "spb/lattice.hpp"
#include "spb/field.hpp"
#include "spb/transform.hpp"
#include "spb/forcing.hpp"
#include "spb/dynamics.hpp"
#include "spb/oracle.hpp"
#include "spb/snapshot.hpp"
#include "spb/spectra.hpp"
#include "spb/bounds.hpp"
#include "spb/filter.hpp"
#include "spb/behavior.hpp"
#include "spb/io/config.hpp"
#include "spb/io/report.hpp"
#include "spb/io/run.hpp"
#include "spb/io/analysis.hpp"

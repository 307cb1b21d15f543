#pragma once

#include "qstrassen/bipartite.hpp"
#include "qstrassen/config.hpp"
#include "qstrassen/errors.hpp"
#include "qstrassen/fibers.hpp"
#include "qstrassen/flow.hpp"
#include "qstrassen/linalg.hpp"
#include "qstrassen/sdp/f_min.hpp"
#include "qstrassen/sdp/marginal_sdp.hpp"
#include "qstrassen/strassen.hpp"
#include "qstrassen/instances.hpp"

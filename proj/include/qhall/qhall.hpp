#pragma once

#include "qhall/config.hpp"
#include "qhall/constants.hpp"
#include "qhall/csv.hpp"
#include "qhall/dos.hpp"
#include "qhall/errors.hpp"
#include "qhall/filling.hpp"
#include "qhall/specfun.hpp"
#include "qhall/sweeps.hpp"
#include "qhall/transport.hpp"

#pragma once

#include "cavgate/dynamics.hpp"
#include "cavgate/errors.hpp"
#include "cavgate/experiments.hpp"
#include "cavgate/gates.hpp"
#include "cavgate/model.hpp"
#include "cavgate/protocol.hpp"
#include "cavgate/spectral.hpp"

#pragma once

// Everything except the HTTP layer (anytime/service.hpp), which pulls in
// cpp-httplib and threads.

#include "anytime/comparators.hpp"
#include "anytime/confseq.hpp"
#include "anytime/core.hpp"
#include "anytime/design.hpp"
#include "anytime/error.hpp"
#include "anytime/futility.hpp"
#include "anytime/io.hpp"
#include "anytime/novick.hpp"
#include "anytime/platform.hpp"
#include "anytime/rng.hpp"
#include "anytime/session.hpp"
#include "anytime/simengine.hpp"

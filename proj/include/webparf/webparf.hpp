#pragma once

#include "webparf/allocator.hpp"
#include "webparf/analyzer.hpp"
#include "webparf/dispatcher.hpp"
#include "webparf/engine.hpp"
#include "webparf/errors.hpp"
#include "webparf/fetcher.hpp"
#include "webparf/frontier.hpp"
#include "webparf/simweb.hpp"
#include "webparf/url.hpp"
#include "webparf/url_db.hpp"

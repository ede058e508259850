#pragma once

#include "metacurate/balancer.hpp"
#include "metacurate/common.hpp"
#include "metacurate/counting.hpp"
#include "metacurate/digest.hpp"
#include "metacurate/loader.hpp"
#include "metacurate/matcher.hpp"
#include "metacurate/metadata.hpp"
#include "metacurate/pipeline.hpp"
#include "metacurate/records.hpp"
#include "metacurate/rng.hpp"
#include "metacurate/stats.hpp"
#include "metacurate/synth.hpp"
#include "metacurate/unicode.hpp"

#pragma once

#include "neurosdt/confidence.hpp"
#include "neurosdt/criteria.hpp"
#include "neurosdt/csv.hpp"
#include "neurosdt/error.hpp"
#include "neurosdt/io.hpp"
#include "neurosdt/lpa.hpp"
#include "neurosdt/npstats.hpp"
#include "neurosdt/observer.hpp"
#include "neurosdt/probability.hpp"
#include "neurosdt/random.hpp"
#include "neurosdt/roc.hpp"
#include "neurosdt/sdt.hpp"
#include "neurosdt/tfr.hpp"
#include "neurosdt/trials.hpp"
#include "neurosdt/types.hpp"
#include "neurosdt/voting.hpp"

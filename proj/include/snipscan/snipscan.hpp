#pragma once

#include <snipscan/corpus.hpp>
#include <snipscan/default_catalog.hpp>
#include <snipscan/engine.hpp>
#include <snipscan/error.hpp>
#include <snipscan/evalharness.hpp>
#include <snipscan/miner.hpp>
#include <snipscan/report.hpp>
#include <snipscan/rules.hpp>
#include <snipscan/simlcs.hpp>
#include <snipscan/standardizer.hpp>
#include <snipscan/taxonomy.hpp>

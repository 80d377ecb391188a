#pragma once

#include "atg/alert_io.hpp"
#include "atg/alertgen.hpp"
#include "atg/attack_model.hpp"
#include "atg/engine.hpp"
#include "atg/graph.hpp"
#include "atg/hypothesizer.hpp"
#include "atg/oracle.hpp"
#include "atg/run.hpp"
#include "atg/session.hpp"
#include "atg/type_graph.hpp"
#include "atg/validate.hpp"
#include "atg/value.hpp"

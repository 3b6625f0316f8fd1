#ifndef CJSR_CJSR_HPP
#define CJSR_CJSR_HPP

// Core library. File formats and reports live in <cjsr/io.hpp>, which also
// needs nlohmann_json and OpenSSL.

#include <cjsr/automaton.hpp>
#include <cjsr/errors.hpp>
#include <cjsr/estimator.hpp>
#include <cjsr/lifts.hpp>
#include <cjsr/linalg.hpp>
#include <cjsr/multinorm_sdp.hpp>
#include <cjsr/switched_system.hpp>

#endif

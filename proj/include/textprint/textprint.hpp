#pragma once

// Umbrella header.

#include "textprint/corpus.hpp"      // IWYU pragma: export
#include "textprint/eval.hpp"        // IWYU pragma: export
#include "textprint/features.hpp"    // IWYU pragma: export
#include "textprint/fingerprint.hpp" // IWYU pragma: export
#include "textprint/gbm.hpp"         // IWYU pragma: export
#include "textprint/report_io.hpp"   // IWYU pragma: export
#include "textprint/textproc.hpp"    // IWYU pragma: export
#include "textprint/version.hpp"     // IWYU pragma: export

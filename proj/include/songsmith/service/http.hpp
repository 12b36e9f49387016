#pragma once

// Eigen must precede httplib: <resolv.h> defines a `_res` macro.
#include "songsmith/service/studio.hpp"

#include <httplib.h>

namespace songsmith {

/// Routes:
///   POST /generate                    GenerateRequest -> GenerateResponse
///   GET  /generations/{id}/midi       audio/midi
///   GET  /generations/{id}/pianoroll  piano-roll JSON
///   GET  /checkpoints                 checkpoint listing
///   GET  /health
/// Errors are {"error": message, "field": name-or-null}.
void register_routes(httplib::Server& server, StudioService& service);

}  // namespace songsmith

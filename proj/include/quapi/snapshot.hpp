// snapshot.hpp - versioned JSON persistence of evolution state

#pragma once

#include <string>

#include "quapi/evolution.hpp"

namespace quapi::snap {

// Serializes to the self-describing "quapi-state" JSON document. Doubles
// round-trip exactly, so a run resumed from the file continues bit for bit.
std::string to_json(const evo::StateSnapshot& s);

// Parses and structurally validates a document produced by to_json. Grid
// consistency with a concrete run is left to SystemState::restore.
evo::StateSnapshot from_json(const std::string& text);

void save_snapshot(const evo::StateSnapshot& s, const std::string& path);
evo::StateSnapshot load_snapshot(const std::string& path);

}  // namespace quapi::snap

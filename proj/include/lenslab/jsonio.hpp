// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include <json.hpp>

namespace lenslab {

// Insertion-ordered JSON so every emitted document has a deterministic
// field order.
using Json = nlohmann::ordered_json;

// %.17g — round-trip-exact and stable across reruns. Throws NumericError on
// non-finite values (JSON cannot carry them).
std::string fmt_real(double v);

// Deterministic writer: field order preserved, reals via fmt_real.
// indent < 0 emits a single line.
std::string dump_json(const Json& j, int indent = -1);

Json parse_json(const std::string& text);
Json parse_json_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace lenslab

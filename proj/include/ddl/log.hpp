#pragma once

#include <functional>
#include <string_view>

namespace ddl::log {

using Sink = std::function<void(std::string_view)>;

// Replaces the warning sink (stderr by default). Pass an empty function to
// silence warnings. Not thread-safe; set it before training starts.
void set_warning_sink(Sink sink);

void warning(std::string_view message);

}  // namespace ddl::log

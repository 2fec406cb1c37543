#include "ddl/log.hpp"

#include <iostream>

namespace ddl::log {
namespace {

Sink& sink() {
  static Sink current = [](std::string_view message) {
    std::cerr << "warning: " << message << '\n';
  };
  return current;
}

}  // namespace

void set_warning_sink(Sink sink_fn) { sink() = std::move(sink_fn); }

void warning(std::string_view message) {
  if (sink()) sink()(message);
}

}  // namespace ddl::log
